//! Quintic interpolating B-splines with not-a-knot end conditions.

use crate::error::{GlError, Result};
use crate::jet::Jet;

const P: usize = 5;

#[derive(Clone, Debug)]
pub struct QuinticSpline {
    knots: Vec<f64>,
    coef: Vec<f64>,
}

impl QuinticSpline {
    /// Interpolate `ys` at strictly increasing sites `xs` (at least 6 points).
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<QuinticSpline> {
        let n = xs.len();
        if n != ys.len() {
            return Err(GlError::InvalidParameter("sample length mismatch".into()));
        }
        if n < P + 1 {
            return Err(GlError::InvalidParameter(format!("quintic spline needs at least 6 samples, got {n}")));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(GlError::InvalidParameter("sample sites must be finite and strictly increasing".into()));
        }
        let mut knots = Vec::with_capacity(n + P + 1);
        knots.extend(std::iter::repeat(xs[0]).take(P + 1));
        knots.extend_from_slice(&xs[3..n - 3]);
        knots.extend(std::iter::repeat(xs[n - 1]).take(P + 1));
        debug_assert_eq!(knots.len(), n + P + 1);

        // Banded collocation system, half bandwidth P.
        let w = 2 * P + 1;
        let mut band = vec![0.0; n * w];
        let idx = |i: usize, j: usize| i * w + (j + P - i);
        for (i, &x) in xs.iter().enumerate() {
            let span = find_span(&knots, n, x);
            let basis = basis_ders(&knots, span, x, 0);
            for r in 0..=P {
                let j = span - P + r;
                band[idx(i, j)] = basis[0][r];
            }
        }
        let mut rhs = ys.to_vec();
        // Elimination without pivoting; the collocation matrix is totally positive.
        for k in 0..n {
            let piv = band[idx(k, k)];
            if piv.abs() < 1e-300 {
                return Err(GlError::NoSolution("singular spline collocation".into()));
            }
            for i in (k + 1)..n.min(k + P + 1) {
                let l = band[idx(i, k)] / piv;
                if l == 0.0 {
                    continue;
                }
                for j in k..n.min(k + P + 1) {
                    band[idx(i, j)] -= l * band[idx(k, j)];
                }
                rhs[i] -= l * rhs[k];
            }
        }
        let mut coef = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = rhs[k];
            for j in (k + 1)..n.min(k + P + 1) {
                s -= band[idx(k, j)] * coef[j];
            }
            coef[k] = s / band[idx(k, k)];
        }
        Ok(QuinticSpline { knots, coef })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn jet(&self, x: f64) -> Jet {
        let n = self.coef.len();
        let (a, b) = self.domain();
        let x = x.clamp(a, b);
        let span = find_span(&self.knots, n, x);
        let ders = basis_ders(&self.knots, span, x, 4);
        let mut out = [0.0; 5];
        for (k, row) in ders.iter().enumerate() {
            let mut s = 0.0;
            for r in 0..=P {
                s += row[r] * self.coef[span - P + r];
            }
            out[k] = s;
        }
        Jet(out)
    }
}

fn find_span(knots: &[f64], n: usize, x: f64) -> usize {
    if x >= knots[n] {
        return n - 1;
    }
    // Largest i in [P, n-1] with knots[i] <= x.
    let i = knots[P..=n].partition_point(|&k| k <= x) + P - 1;
    i.clamp(P, n - 1)
}

/// Nonzero basis functions and their derivatives up to `nd` at `x`.
fn basis_ders(knots: &[f64], span: usize, x: f64, nd: usize) -> Vec<[f64; P + 1]> {
    let mut ndu = [[0.0; P + 1]; P + 1];
    let mut left = [0.0; P + 1];
    let mut right = [0.0; P + 1];
    ndu[0][0] = 1.0;
    for j in 1..=P {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![[0.0; P + 1]; nd + 1];
    for j in 0..=P {
        ders[0][j] = ndu[j][P];
    }
    let mut a = [[0.0; P + 1]; 2];
    for r in 0..=P {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nd.min(P) {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = P - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { P - r };
            for j in j1..=j2 {
                let col = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][col];
                d += a[s2][j] * ndu[col][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = P as f64;
    for k in 1..=nd.min(P) {
        for j in 0..=P {
            ders[k][j] *= fac;
        }
        fac *= (P - k) as f64;
    }
    ders
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quintic_polynomials() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.1 * x.powi(5);
        let xs: Vec<f64> = (0..20).map(|i| (i as f64 * 0.13).powf(1.2)).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
        let s = QuinticSpline::new(&xs, &ys).unwrap();
        let x = 1.234;
        let j = s.jet(x);
        let exact = Jet::var(x);
        let e = Jet::constant(1.0) - exact.scale(2.0) + exact.powi(3).scale(0.5) - exact.powi(5).scale(0.1);
        for k in 0..5 {
            assert!((j.d(k) - e.d(k)).abs() < 1e-9, "order {k}: {} vs {}", j.d(k), e.d(k));
        }
    }

    #[test]
    fn converges_for_sine() {
        let n = 200;
        let xs: Vec<f64> = (0..n).map(|i| 3.0 * i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = QuinticSpline::new(&xs, &ys).unwrap();
        for &x in &[0.01, 0.77, 1.5, 2.99] {
            let j = s.jet(x);
            assert!((j.v() - x.sin()).abs() < 1e-12);
            assert!((j.d(1) - x.cos()).abs() < 1e-9);
            assert!((j.d(2) + x.sin()).abs() < 1e-7);
        }
    }
}
