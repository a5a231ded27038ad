use once_cell::sync::Lazy;

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::{step_down, step_down_integral, step_up};
use crate::smooth::SmoothFn;
use crate::warped::{CurvatureReport, GridPolicy, WarpingProfile};

use super::ProfileChain;

/// `max |m'|` of the flat step, with a little headroom.
static STEP_SLOPE: Lazy<f64> = Lazy::new(|| {
    let n = 20_000;
    let h = 1.0 / n as f64;
    let m = (1..n).map(|i| step_down(Jet::var(i as f64 * h)).d(1).abs()).fold(0.0, f64::max);
    1.02 * m
});

const FLOOR_MARGIN: f64 = 1e-3;

/// Flat-ended neck between two radii: a flat, a bend, a straight slope, a
/// second bend and a final flat, each bend and flat of width
/// `w = w_frac · min(r_in, r_out)`.
///
/// Equal radii give a cylinder of length `4w`, and the shape depends
/// continuously on the radii.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neck {
    pub r_in: f64,
    pub r_out: f64,
    pub w: f64,
    /// Slope actually used, `min(max_slope, |r_in - r_out| / w)`.
    pub slope: f64,
    /// Length of the straight part.
    pub lin: f64,
}

impl Neck {
    pub fn new(r_in: f64, r_out: f64, w_frac: f64, max_slope: f64) -> Neck {
        let w = w_frac * r_in.min(r_out);
        let d = (r_in - r_out).abs();
        let slope = max_slope.min(d / w);
        let lin = if slope > 0.0 { (d / slope - w).max(0.0) } else { 0.0 };
        Neck { r_in, r_out, w, slope, lin }
    }

    pub fn len(&self) -> f64 {
        4.0 * self.w + self.lin
    }

    /// The five parts in order from `r_in` to `r_out`.
    pub fn chain(&self) -> ProfileChain {
        let (hi, lo) = (self.r_in.max(self.r_out), self.r_in.min(self.r_out));
        let (w, s, lin) = (self.w, self.slope, self.lin);
        let top = SmoothFn::new(0.0, w, move |t| {
            let u = step_up(Jet::affine(t, 0.0, 1.0 / w));
            let x = t / w;
            Jet([hi - s * w * (x - step_down_integral(x)), -s * u.d(0), -s * u.d(1), -s * u.d(2), -s * u.d(3)])
        });
        let straight = SmoothFn::new(0.0, lin, move |t| Jet([lo + 0.5 * s * w + s * (lin - t), -s, 0.0, 0.0, 0.0]));
        let bottom = SmoothFn::new(0.0, w, move |t| {
            let m = step_down(Jet::affine(t, 0.0, 1.0 / w));
            let x = t / w;
            Jet([lo + s * w * (0.5 - step_down_integral(x)), -s * m.d(0), -s * m.d(1), -s * m.d(2), -s * m.d(3)])
        });
        let parts = [
            SmoothFn::constant(0.0, w, hi),
            top,
            straight,
            bottom,
            SmoothFn::constant(0.0, w, lo),
        ];
        let lens = [w, w, lin, w, w];
        let mut c = ProfileChain::new();
        if self.r_in >= self.r_out {
            for (p, l) in parts.iter().zip(lens) {
                c = c.push(p, 0.0, l);
            }
        } else {
            for (p, l) in parts.iter().zip(lens).rev() {
                c = c.push(&reflect(p, l), 0.0, l);
            }
        }
        c
    }
}

/// `t ↦ f(len - t)`.
fn reflect(f: &SmoothFn, len: f64) -> SmoothFn {
    let f = f.clone();
    SmoothFn::new(0.0, len, move |t| {
        let j = f.jet(len - t);
        Jet([j.d(0), -j.d(1), j.d(2), -j.d(3), j.d(4)])
    })
}

/// Lower bound for the curvature of every neck with radii at most `r_hi`,
/// slope `s` and bend width `c` times its smaller radius `r'`.
///
/// Where `f'' <= 0` the bound is `(n-1)(n-2)(1-s²)/r_hi²`. On the lower bend
/// `f'' <= s max|m'| / (c r')` and `r' <= f <= r' y` with `y = 1 + s c / 2`.
pub fn neck_bound(r_hi: f64, c: f64, s: f64, dim: usize) -> f64 {
    let n = dim as f64;
    let upper = (n - 1.0) * (n - 2.0) * (1.0 - s * s) / (r_hi * r_hi);
    let y = 1.0 + 0.5 * s * c;
    let bracket = (n - 2.0) * (1.0 - s * s) / y - 2.0 * s * *STEP_SLOPE / c;
    if bracket <= 0.0 {
        return f64::NEG_INFINITY;
    }
    upper.min((n - 1.0) * bracket / (y * r_hi * r_hi))
}

/// Largest slope `2^-j / 2` whose neck bound clears `floor` with margin.
pub fn neck_slope(r_hi: f64, c: f64, dim: usize, floor: f64) -> Result<f64> {
    if !(r_hi > 0.0 && c > 0.0) {
        return Err(GlError::InvalidParameter(format!("neck needs r_hi > 0 and c > 0, got {r_hi}, {c}")));
    }
    let target = floor.max(0.0) * (1.0 + FLOOR_MARGIN);
    let mut s = 0.5;
    for _ in 0..200 {
        let b = neck_bound(r_hi, c, s, dim);
        if b > target && b > 0.0 {
            return Ok(s);
        }
        s *= 0.5;
    }
    Err(GlError::NoSolution(format!("no neck slope clears floor {floor} below radius {r_hi}")))
}

/// A product-ended annular metric joining radius `r0` to radius `r1`.
#[derive(Clone, Debug)]
pub struct AnnularFamily {
    pub r0: f64,
    pub r1: f64,
    pub inner: f64,
    pub outer: f64,
    pub floor: f64,
    pub neck: Neck,
    pub profile: WarpingProfile,
}

impl AnnularFamily {
    /// Neck from `r0` at `inner` to `r1` with bends of width `w_frac · min(r0, r1)`.
    pub fn new(r0: f64, r1: f64, inner: f64, w_frac: f64, dim: usize, floor: f64) -> Result<AnnularFamily> {
        if !(inner > 0.0) {
            return Err(GlError::InvalidParameter(format!("inner radius must be positive, got {inner}")));
        }
        let slope = neck_slope(r0.max(r1), w_frac, dim, floor)?;
        let neck = Neck::new(r0, r1, w_frac, slope);
        let f = neck.chain().to_smooth_at(inner);
        let outer = inner + neck.len();
        let mut profile = WarpingProfile::annulus(SmoothFn::constant(inner, outer, 1.0), f, dim)?;
        profile.unit_speed = true;
        Ok(AnnularFamily { r0, r1, inner, outer, floor, neck, profile })
    }

    pub fn verify(&self, policy: GridPolicy) -> Result<CurvatureReport> {
        self.neck.chain().verify(self.profile.dim, self.floor, policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neck_reaches_both_radii() {
        for &(a, b) in &[(1.0, 0.3), (0.3, 1.0), (0.7, 0.7)] {
            let n = Neck::new(a, b, 0.1 / a.min(b), 0.25);
            let f = n.chain().to_smooth();
            assert!((f.eval(0.0, 0) - a).abs() < 1e-14);
            assert!((f.eval(n.len(), 0) - b).abs() < 1e-14, "{} {}", f.eval(n.len(), 0), b);
            for k in 1..5 {
                assert_eq!(f.eval(0.0, k), 0.0);
                assert_eq!(f.eval(n.len(), k), 0.0);
            }
        }
        assert!((Neck::new(0.7, 0.7, 1.0, 0.25).len() - 2.8).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_differences() {
        let n = Neck::new(1.0, 0.2, 0.5, 0.4);
        let f = n.chain().to_smooth();
        let h = 1e-6;
        for k in 1..60 {
            let t = n.len() * k as f64 / 60.0;
            let fd = (f.eval(t + h, 0) - f.eval(t - h, 0)) / (2.0 * h);
            assert!((fd - f.eval(t, 1)).abs() < 1e-7, "t={t}");
            let fd2 = (f.eval(t + h, 1) - f.eval(t - h, 1)) / (2.0 * h);
            assert!((fd2 - f.eval(t, 2)).abs() < 1e-5 * (1.0 + fd2.abs()), "t={t}");
        }
    }

    #[test]
    fn annular_metric_clears_floor() {
        for &(r0, r1, floor) in &[(1.0, 0.1, 0.0), (0.1, 1.0, 2.0), (1.0, 1e-20, 5.0)] {
            let a = AnnularFamily::new(r0, r1, 1.0, 4.0, 4, floor).unwrap();
            let rep = a.verify(GridPolicy::with_uniform(256)).unwrap();
            assert!(rep.pass, "{r0} {r1}: {}", rep.min_kappa);
            assert!(neck_bound(r0.max(r1), 4.0, a.neck.slope, 4) <= rep.min_kappa * (1.0 + 1e-9));
        }
        assert!(AnnularFamily::new(1.0, 0.5, 1.0, 4.0, 4, 10.0).is_err());
    }

    #[test]
    fn bound_covers_intermediate_radii() {
        // One slope serves every neck below r_hi, whatever its radii.
        let s = neck_slope(1.0, 0.5, 4, 4.5).unwrap();
        for &(a, b) in &[(1.0, 0.8), (0.9, 0.3), (1e-6, 1.0), (0.5, 0.5)] {
            let c = Neck::new(a, b, 0.5, s).chain();
            let rep = c.verify(4, 4.5, GridPolicy::with_uniform(256)).unwrap();
            assert!(rep.pass, "{a} {b}: {}", rep.min_kappa);
        }
    }
}
