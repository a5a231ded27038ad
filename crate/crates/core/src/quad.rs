//! Quadrature and scalar root finding.

use once_cell::sync::Lazy;

use crate::error::{GlError, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

static GL16: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre_rule(16));

/// Fixed 16-point Gauss–Legendre rule on [a, b].
pub fn gl16(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = &*GL16;
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut s = 0.0;
    for i in 0..x.len() {
        s += w[i] * f(m + h * x[i]);
    }
    s * h
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss–Kronrod 7/15 on [a, b] for a vector-valued integrand of width `N`.
/// Returns the Kronrod estimate and the componentwise Gauss/Kronrod difference.
fn gk15<const N: usize>(f: &dyn Fn(f64) -> [f64; N], a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let fc = f(m);
    for j in 0..N {
        k[j] = WGK[7] * fc[j];
        g[j] = WG[3] * fc[j];
    }
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(m - dx);
        let f2 = f(m + dx);
        for j in 0..N {
            let s = f1[j] + f2[j];
            k[j] += WGK[i] * s;
            if i % 2 == 1 {
                g[j] += WG[i / 2] * s;
            }
        }
    }
    let mut err = [0.0; N];
    for j in 0..N {
        k[j] *= h;
        g[j] *= h;
        err[j] = (k[j] - g[j]).abs();
    }
    (k, err)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    // Start from a fixed subdivision so narrow features are not missed.
    let pieces = 16;
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for i in 0..pieces {
        let lo = a + h * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + h };
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += rec(f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 48);
    }
    total
}

/// Cumulative integrals of `φ(s)` and `s φ(s)` from the first breakpoint,
/// tabulated on adaptively refined panels.
///
/// The integrand may be supported on several disjoint pieces; outside the
/// pieces it is taken to be zero.
#[derive(Clone, Debug)]
pub struct CumulativeTable {
    ends: Vec<f64>,
    starts: Vec<f64>,
    cum0: Vec<f64>,
    cum1: Vec<f64>,
    total0: f64,
    total1: f64,
}

impl CumulativeTable {
    /// Tabulate over the given disjoint, sorted pieces `[a_i, b_i]`.
    pub fn build(phi: &(dyn Fn(f64) -> f64 + Sync), pieces: &[(f64, f64)], rel_tol: f64) -> CumulativeTable {
        let integrand = |s: f64| {
            let v = phi(s);
            [v, s * v]
        };
        let mut panels: Vec<(f64, f64, [f64; 2])> = Vec::new();
        for &(a, b) in pieces {
            if b <= a {
                continue;
            }
            // Seed panels: geometric towards both ends when the piece spans
            // several decades relative to its start.
            let mut seeds = vec![a, b];
            if a > 0.0 && b / a > 8.0 {
                let decades = (b / a).log10().ceil() as usize;
                for i in 1..(4 * decades) {
                    seeds.push(a * (b / a).powf(i as f64 / (4 * decades) as f64));
                }
            }
            seeds.sort_by(|x, y| x.partial_cmp(y).unwrap());
            seeds.dedup();
            let scale_est = {
                let mut s = [0.0f64; 2];
                for w in seeds.windows(2) {
                    let (v, _) = gk15(&integrand, w[0], w[1]);
                    s[0] += v[0].abs();
                    s[1] += v[1].abs();
                }
                s
            };
            for w in seeds.windows(2) {
                refine(&integrand, w[0], w[1], rel_tol, scale_est, 0, &mut panels);
            }
        }
        let mut ends = Vec::with_capacity(panels.len());
        let mut starts = Vec::with_capacity(panels.len());
        let mut cum0 = Vec::with_capacity(panels.len());
        let mut cum1 = Vec::with_capacity(panels.len());
        let (mut c0, mut c1) = (0.0, 0.0);
        for (a, b, v) in panels {
            starts.push(a);
            ends.push(b);
            cum0.push(c0);
            cum1.push(c1);
            c0 += v[0];
            c1 += v[1];
        }
        CumulativeTable { ends, starts, cum0, cum1, total0: c0, total1: c1 }
    }

    pub fn total(&self) -> (f64, f64) {
        (self.total0, self.total1)
    }

    /// `(∫ φ, ∫ s φ)` from the start of the table up to `t`.
    pub fn eval(&self, phi: &dyn Fn(f64) -> f64, t: f64) -> (f64, f64) {
        if self.ends.is_empty() || t <= self.starts[0] {
            return (0.0, 0.0);
        }
        // First panel whose end is >= t.
        let i = self.ends.partition_point(|&e| e < t);
        if i >= self.ends.len() {
            return (self.total0, self.total1);
        }
        let a = self.starts[i];
        if t <= a {
            return (self.cum0[i], self.cum1[i]);
        }
        let integrand = |s: f64| {
            let v = phi(s);
            [v, s * v]
        };
        let (v, _) = gk15(&integrand, a, t);
        (self.cum0[i] + v[0], self.cum1[i] + v[1])
    }
}

fn refine(
    f: &dyn Fn(f64) -> [f64; 2],
    a: f64,
    b: f64,
    rel_tol: f64,
    scale: [f64; 2],
    depth: u32,
    out: &mut Vec<(f64, f64, [f64; 2])>,
) {
    let (v, err) = gk15(f, a, b);
    let ok = (0..2).all(|j| err[j] <= rel_tol * scale[j].max(f64::MIN_POSITIVE));
    if depth >= 200 || ok || b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
        out.push((a, b, v));
        return;
    }
    let m = 0.5 * (a + b);
    refine(f, a, m, rel_tol, scale, depth + 1, out);
    refine(f, m, b, rel_tol, scale, depth + 1, out);
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(GlError::NoBracket { lo, hi });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Invert a nondecreasing function: smallest `t` in `[lo, hi]` with `f(t) >= y`.
pub fn invert_monotone(f: &dyn Fn(f64) -> f64, y: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if f(m) >= y {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let v = gl16(&|x| x.powi(31) + 3.0 * x.powi(10), -1.0, 2.0);
        let exact = (2f64.powi(32) - 1.0) / 32.0 + 3.0 * (2f64.powi(11) + 1.0) / 11.0;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn gk15_weights_sum_to_two() {
        let s: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn simpson_matches_closed_form() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn cumulative_table_over_many_decades() {
        // ∫ 1/s over [1e-30, 1] = 30 ln 10; ∫ s/s = 1 - 1e-30
        let phi = |s: f64| 1.0 / s;
        let tab = CumulativeTable::build(&phi, &[(1e-30, 1.0)], 1e-14);
        let (i0, i1) = tab.total();
        assert!((i0 - 30.0 * 10f64.ln()).abs() < 1e-11);
        assert!((i1 - 1.0).abs() < 1e-13);
        let (p0, _) = tab.eval(&phi, 1e-10);
        assert!((p0 - 20.0 * 10f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn bisection_finds_root() {
        let r = bisect(&|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        assert!(bisect(&|x| x * x + 1.0, 0.0, 2.0, 1e-15).is_err());
    }
}
