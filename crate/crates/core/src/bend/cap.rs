use crate::jet::{Jet, JetN};
use crate::mollifier::{step_down_at, step_down_integral, step_down_n};
use crate::quad::gl16;
use crate::warped::TorpedoSpec;

/// The plane curve of the unit torpedo, traversed from the start of its
/// circular end towards the axis.
///
/// With `F` the unit torpedo function, the curve is `r = F(u)` at distance
/// `u` from the axis, so its angle is `arccos F'(u)` and its curvature, as a
/// function of `σ = len - u`, is `F''(u) / sqrt(1 - F'(u)^2)`: zero on the
/// cylinder, `-1` on the round cap.
#[derive(Clone, Copy, Debug)]
pub struct UnitCap {
    ua: f64,
    ub: f64,
}

impl UnitCap {
    pub fn new(spec: &TorpedoSpec) -> UnitCap {
        UnitCap { ua: spec.blend.0 * spec.t_unit, ub: spec.blend.1 * spec.t_unit }
    }

    /// Arclength from the horizontal end to the axis.
    pub fn len(&self) -> f64 {
        self.ub
    }

    /// Arclength from the horizontal end to the start of the round part.
    pub fn round_start(&self) -> f64 {
        self.ub - self.ua
    }

    fn tau(&self, u: f64) -> JetN<7> {
        let w = self.ub - self.ua;
        let d = step_down_n(JetN::<7>::affine(u, -self.ua / w, 1.0 / w));
        let x = (u - self.ua) / w;
        JetN([self.ua + w * step_down_integral(x), d.0[0], d.0[1], d.0[2], d.0[3], d.0[4], d.0[5]])
    }

    /// Curvature at `σ ∈ [0, len]`.
    pub fn curvature(&self, sigma: f64) -> Jet {
        let u = self.ub - sigma;
        if u <= self.ua {
            return Jet::constant(-1.0);
        }
        if u >= self.ub {
            return Jet::ZERO;
        }
        let f = self.tau(u).sin();
        let f1 = f.derivative();
        let f2 = f1.derivative();
        let g = f2.mul(f1.mul(f1).scale(-1.0).add_const(1.0).powf(-0.5)).truncate();
        Jet([g.0[0], -g.0[1], g.0[2], -g.0[3], g.0[4]])
    }

    /// Angle `arccos F'(u)` of the curve at distance `u` from the axis.
    pub fn angle(&self, u: f64) -> f64 {
        if u <= self.ua {
            return u;
        }
        if u >= self.ub {
            return std::f64::consts::FRAC_PI_2;
        }
        let w = self.ub - self.ua;
        let x = (u - self.ua) / w;
        let tau = self.ua + w * step_down_integral(x);
        (tau.cos() * step_down_at(x)).clamp(-1.0, 1.0).acos()
    }

    /// Height lost when the curvature is scaled by `ratio`, starting from the
    /// angle `ratio * π/2` and turning back to vertical.
    pub fn drop(&self, ratio: f64) -> f64 {
        let f = |u: f64| (ratio * self.angle(u)).cos();
        let mut acc = 0.0;
        let cuts = 8;
        for i in 0..cuts {
            let (a, b) = (self.ua * i as f64 / cuts as f64, self.ua * (i + 1) as f64 / cuts as f64);
            acc += gl16(&f, a, b);
        }
        let w = self.ub - self.ua;
        for i in 0..4 * cuts {
            let a = self.ua + w * i as f64 / (4 * cuts) as f64;
            acc += gl16(&f, a, a + w / (4 * cuts) as f64);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bend::{curve_from_curvature, CurvatureFunction};
    use crate::smooth::SmoothFn;

    #[test]
    fn total_turning_is_a_quarter() {
        let cap = UnitCap::new(&TorpedoSpec::default());
        let tot = crate::quad::adaptive_simpson(&|s| cap.curvature(s).v(), 0.0, cap.len(), 1e-13);
        assert!((tot + std::f64::consts::FRAC_PI_2).abs() < 1e-10, "{tot}");
    }

    #[test]
    fn drop_limits() {
        let cap = UnitCap::new(&TorpedoSpec::default());
        assert!((cap.drop(1.0) - 1.0).abs() < 1e-12);
        assert!((cap.drop(0.0) - cap.len()).abs() < 1e-12);
    }

    #[test]
    fn curvature_is_the_derivative_of_the_angle() {
        let cap = UnitCap::new(&TorpedoSpec::default());
        let h = 1e-5;
        for &sig in &[0.1, 0.2, 0.3, 0.35] {
            let u = cap.len() - sig;
            let fd = -(cap.angle(u + h) - cap.angle(u - h)) / (2.0 * h);
            assert!((cap.curvature(sig).v() - fd).abs() < 1e-6, "sigma={sig}");
        }
    }

    #[test]
    fn integrated_cap_lands_on_the_axis() {
        let cap = UnitCap::new(&TorpedoSpec::default());
        // Start horizontally: a quarter turn of a tiny circle first.
        let rho = 1e-3;
        let pre = std::f64::consts::FRAC_PI_2 * rho;
        let k = SmoothFn::new(0.0, pre + cap.len(), move |s| {
            if s <= pre {
                Jet::constant(1.0 / rho)
            } else {
                cap.curvature(s - pre)
            }
        })
        .with_features(vec![pre]);
        let c = curve_from_curvature(&CurvatureFunction::new(k), 1.0 + rho).unwrap();
        let [_, r, phi] = c.end();
        assert!(r.abs() < 1e-9, "r = {r}");
        assert!(phi.abs() < 1e-10);
    }
}
