use serde::{Deserialize, Serialize};

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::{step_down, step_down_integral};
use crate::smooth::SmoothFn;

use super::WarpingProfile;

/// Torpedo of radius `eps` and size `eps * t_unit`.
///
/// The unit warping function is `sin τ(u)`, where `τ' = 1` on the cap,
/// `τ'` falls along the flat mollifier over `[blend.0, blend.1] * t_unit`,
/// and `τ ≡ π/2` on the cylinder. Reaching `π/2` exactly forces
/// `(blend.0 + blend.1) * t_unit = π`. Since `τ' <= 1` and `τ'' <= 0`,
/// `1 - F'^2 >= F^2` and `F'' <= 0`, which gives the curvature floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorpedoSpec {
    pub eps: f64,
    pub t_unit: f64,
    pub blend: (f64, f64),
}

impl Default for TorpedoSpec {
    fn default() -> Self {
        TorpedoSpec { eps: 1.0, t_unit: std::f64::consts::PI / 0.8, blend: (0.35, 0.45) }
    }
}

impl TorpedoSpec {
    pub fn with_eps(eps: f64) -> TorpedoSpec {
        TorpedoSpec { eps, ..TorpedoSpec::default() }
    }

    /// Total length `eps * t_unit`.
    pub fn size(&self) -> f64 {
        self.eps * self.t_unit
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.blend;
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(GlError::InvalidParameter(format!("torpedo radius must be positive, got {}", self.eps)));
        }
        if !(0.0 < a && a < b && b < 1.0) {
            return Err(GlError::InvalidParameter(format!("blend fractions must satisfy 0 < a < b < 1, got ({a}, {b})")));
        }
        if ((a + b) * self.t_unit - std::f64::consts::PI).abs() > 1e-12 {
            return Err(GlError::InvalidParameter("blend fractions and unit length must satisfy (a + b) * T = pi".into()));
        }
        Ok(())
    }
}

/// The unit warping function `F` of the torpedo, defined on `[0, ∞)`.
pub fn torpedo_function(spec: &TorpedoSpec) -> impl Fn(f64) -> Jet + Send + Sync + Clone + 'static {
    let ua = spec.blend.0 * spec.t_unit;
    let ub = spec.blend.1 * spec.t_unit;
    move |u: f64| {
        if u <= ua {
            Jet::var(u).sin()
        } else if u >= ub {
            Jet::constant(1.0)
        } else {
            let w = ub - ua;
            let x = (u - ua) / w;
            let d = step_down(Jet::affine(u, -ua / w, 1.0 / w));
            let tau = Jet([ua + w * step_down_integral(x), d.d(0), d.d(1), d.d(2), d.d(3)]);
            tau.sin()
        }
    }
}

/// Unit-speed torpedo profile on `[0, eps * t_unit]`.
pub fn make_torpedo(spec: &TorpedoSpec, n: usize) -> Result<WarpingProfile> {
    spec.validate()?;
    let unit = torpedo_function(spec);
    let eps = spec.eps;
    let size = spec.size();
    let f = SmoothFn::new(0.0, size, move |t| Jet::affine(t, 0.0, 1.0 / eps).compose(unit(t / eps)).scale(eps))
        .with_features(vec![spec.blend.0 * size, spec.blend.1 * size]);
    WarpingProfile::unit_disc(f, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::{check_smooth_extension, min_scalar_curvature};

    #[test]
    fn cap_and_cylinder_values() {
        let h = make_torpedo(&TorpedoSpec::default(), 3).unwrap();
        assert!((h.kappa(0.1).unwrap() - 6.0).abs() < 1e-9);
        assert!((h.kappa(3.3).unwrap() - 2.0).abs() < 1e-12);
        assert!(check_smooth_extension(&h.f, 4, 1e-10).ok);
    }

    #[test]
    fn curvature_floor_holds_across_dimensions() {
        for n in [3usize, 4, 5, 8, 12, 20] {
            for eps in [0.5, 1.0] {
                let h = make_torpedo(&TorpedoSpec::with_eps(eps), n).unwrap();
                let r = min_scalar_curvature(&h, 2048, 0.0).unwrap();
                let floor = ((n - 1) * (n - 2)) as f64 / (eps * eps);
                assert!(r.min_kappa >= floor - 1e-9 * floor, "n={n} eps={eps} min={} at {}", r.min_kappa, r.argmin);
            }
        }
    }

    #[test]
    fn rejects_bad_fractions() {
        let mut s = TorpedoSpec::default();
        s.blend = (0.5, 0.4);
        assert!(make_torpedo(&s, 3).is_err());
        s.blend = (0.35, 0.6);
        assert!(make_torpedo(&s, 3).is_err());
        s.t_unit = std::f64::consts::PI / 0.95;
        assert!(make_torpedo(&s, 3).is_ok());
    }
}
