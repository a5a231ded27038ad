use serde::{Deserialize, Serialize};

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::{plateau, plateau_moments};
use crate::smooth::SmoothFn;
use crate::warped::{min_scalar_curvature_with, CurvatureReport, GridPolicy, ProfileKind, WarpingProfile};

/// Largest admissible `F'`.
const SLOPE_BOUND: f64 = 2.0;

/// The cutoff `F` (0 on `(-∞, ε]`, 1 on `[1-ε, ∞)`, `0 <= F' < 2`) and the
/// stretch `τ`; `F_τ(t) = F(t/τ)`.
#[derive(Clone, Debug)]
pub struct StretchSpec {
    pub f: SmoothFn,
    pub eps: f64,
    pub tau: f64,
}

impl StretchSpec {
    pub fn new(f: SmoothFn, eps: f64, tau: f64) -> Result<StretchSpec> {
        if !(eps > 0.0 && eps < 0.25) {
            return Err(GlError::InvalidParameter(format!("eps must lie in (0, 1/4), got {eps}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(GlError::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        let (a, b) = f.domain();
        if a > 0.0 || b < 1.0 {
            return Err(GlError::InvalidParameter(format!("F must be defined on [0, 1], got [{a}, {b}]")));
        }
        let n = 4096;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let j = f.jet(x);
            if !(j.d(1) >= 0.0 && j.d(1) < SLOPE_BOUND) {
                return Err(GlError::InvalidParameter(format!("F' = {} at {x} is outside [0, 2)", j.d(1))));
            }
            if (x <= eps && j.d(0) != 0.0) || (x >= 1.0 - eps && j.d(0) != 1.0) {
                return Err(GlError::InvalidParameter(format!("F = {} at {x} is not flat near the ends", j.d(0))));
            }
        }
        Ok(StretchSpec { f, eps, tau })
    }

    /// `F` rising along the normalized plateau over `[ε, 1-ε]`.
    pub fn standard(eps: f64, tau: f64) -> Result<StretchSpec> {
        let total = plateau_moments(1.0).0;
        let w = 1.0 - 2.0 * eps;
        let f = SmoothFn::new(0.0, 1.0, move |x| {
            let z = Jet::affine(x, -eps / w, 1.0 / w);
            if z.v() <= 0.0 {
                return Jet::ZERO;
            }
            if z.v() >= 1.0 {
                return Jet::constant(1.0);
            }
            let p = plateau(z);
            Jet([plateau_moments(z.v()).0, p.d(0) / w, p.d(1) / w, p.d(2) / w, p.d(3) / w]).scale(1.0 / total)
        })
        .with_features(vec![eps, 1.0 - eps]);
        StretchSpec::new(f, eps, tau)
    }

    pub fn with_tau(&self, tau: f64) -> StretchSpec {
        StretchSpec { tau, ..self.clone() }
    }
}

/// Linear radius path from `eps` to `eps0` over `[0, 1]`.
pub fn radius_path(eps: f64, eps0: f64) -> SmoothFn {
    SmoothFn::new(0.0, 1.0, move |l| Jet::var(l).scale(eps0 - eps).add_const(eps))
}

/// The cylinder `dt² + ρ(F(t/τ))² dξ²` over `[0, τ]`, round fibres of radius `ρ`.
pub fn stretch_profile(path: &SmoothFn, spec: &StretchSpec, dim: usize) -> WarpingProfile {
    let (p, f, tau) = (path.clone(), spec.f.clone(), spec.tau);
    let fj = SmoothFn::new(0.0, tau, move |t| {
        let x = Jet::affine(t, 0.0, 1.0 / tau);
        let lam = x.compose(f.jet(x.v().clamp(0.0, 1.0)));
        lam.compose(p.jet(lam.v().clamp(0.0, 1.0)))
    })
    .with_features(vec![spec.eps * tau, (1.0 - spec.eps) * tau]);
    WarpingProfile { g: SmoothFn::constant(0.0, tau, 1.0), f: fj, outer: tau, dim, kind: ProfileKind::Annulus { inner: 0.0 }, unit_speed: true }
}

/// Result of the stretch search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GajerStretch {
    pub tau: f64,
    pub min_kappa: f64,
    #[serde(skip)]
    pub report: Option<CurvatureReport>,
}

/// Smallest `τ = 2^j` with `κ > 0` on the stretched cylinder, refined by
/// bisection against the failing `τ/2` to two significant digits.
pub fn gajer_stretch(path: &SmoothFn, spec: &StretchSpec, dim: usize, tau_max: f64, policy: GridPolicy) -> Result<GajerStretch> {
    if dim < 3 {
        return Err(GlError::Dimension { need: "n >= 3", got: dim });
    }
    let (a, b) = path.domain();
    if a > 0.0 || b < 1.0 {
        return Err(GlError::InvalidParameter(format!("path must be defined on [0, 1], got [{a}, {b}]")));
    }
    let check = |tau: f64| min_scalar_curvature_with(&stretch_profile(path, &spec.with_tau(tau), dim), 0.0, policy);
    let mut tau = 2f64.powi(-8);
    let mut prev = None;
    let mut rep = check(tau)?;
    while !rep.pass {
        prev = Some(tau);
        tau *= 2.0;
        if tau > tau_max {
            return Err(GlError::NoSolution(format!("no stretch up to tau_max = {tau_max} gives positive curvature")));
        }
        rep = check(tau)?;
    }
    if let Some(mut lo) = prev {
        while tau - lo > 0.01 * tau {
            let mid = 0.5 * (lo + tau);
            let r = check(mid)?;
            if r.pass {
                tau = mid;
                rep = r;
            } else {
                lo = mid;
            }
        }
    }
    Ok(GajerStretch { tau, min_kappa: rep.min_kappa, report: Some(rep) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_cutoff_is_admissible() {
        let s = StretchSpec::standard(0.1, 1.0).unwrap();
        let max = (0..=1000).map(|i| s.f.eval(i as f64 / 1000.0, 1)).fold(0.0, f64::max);
        assert!(max < 2.0 && max > 1.0, "{max}");
        assert!(StretchSpec::standard(0.01, 1.0).is_ok());
        let steep = SmoothFn::new(0.0, 1.0, |x| crate::mollifier::step_up(Jet::affine(x, -0.4, 5.0)));
        assert!(StretchSpec::new(steep, 0.1, 1.0).is_err());
    }

    #[test]
    fn constant_path_keeps_fibre_curvature() {
        let s = StretchSpec::standard(0.1, 0.3).unwrap();
        let p = stretch_profile(&radius_path(0.5, 0.5), &s, 4);
        let rep = min_scalar_curvature_with(&p, 0.0, GridPolicy::with_uniform(256)).unwrap();
        assert!((rep.min_kappa - 24.0).abs() < 1e-9);
        let g = gajer_stretch(&radius_path(0.5, 0.5), &s, 4, 1e6, GridPolicy::with_uniform(256)).unwrap();
        assert_eq!(g.tau, 2f64.powi(-8));
    }

    #[test]
    fn product_collars() {
        let s = StretchSpec::standard(0.1, 5.0).unwrap();
        let p = stretch_profile(&radius_path(0.2, 1.0), &s, 3);
        for i in 0..=10 {
            let t = 0.5 * i as f64 / 10.0;
            assert!((p.f.eval(t, 0) - 0.2).abs() < 1e-12 && p.f.eval(t, 1) == 0.0);
            assert!((p.f.eval(5.0 - t, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_paths_find_a_stretch() {
        let policy = GridPolicy::with_uniform(512);
        for &(e, e0) in &[(0.2, 1.0), (0.5, 1.0)] {
            for k in [3, 4] {
                let path = radius_path(e, e0);
                let s = StretchSpec::standard(0.1, 1.0).unwrap();
                let g = gajer_stretch(&path, &s, k, 1e6, policy).unwrap();
                assert!(g.min_kappa > 0.0 && g.tau.is_finite());
                let twice = stretch_profile(&path, &s.with_tau(2.0 * g.tau), k);
                assert!(min_scalar_curvature_with(&twice, 0.0, policy).unwrap().pass, "({e}, {e0}) k={k} tau={}", g.tau);
                let half = stretch_profile(&path, &s.with_tau(0.99 * g.tau / 1.01), k);
                assert!(!min_scalar_curvature_with(&half, 0.0, policy).unwrap().pass);
            }
        }
    }
}
