use std::sync::Arc;

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::{step_down, step_down_at};
use crate::quad::{bisect, CumulativeTable};
use crate::smooth::SmoothFn;

use super::mu_solve;

/// Deformation of a radial disc diffeomorphism `Υ(G)`, `G = ∫ g`, to one that
/// is the dilation by `ν/ν*` on `D_{ν*}` and unchanged near the boundary.
///
/// `Υ_λ(G) = Υ((1 - λ) G + λ G₁)` with `G₁ = ∫ g₁`, `g₁ = φ₁ + φ₂ g`.
#[derive(Clone)]
pub struct DiffeoDeform {
    g: SmoothFn,
    g_table: Arc<CumulativeTable>,
    pub t0: f64,
    pub nu: f64,
    pub nu_star: f64,
    /// `(ν* + T₀) / 2`: `g₁ = g` beyond this radius.
    pub mid: f64,
    pub a: f64,
    pub b: f64,
    pub mu1: f64,
    pub mu2: f64,
    phi1_table: Arc<CumulativeTable>,
    phi2g_table: Arc<CumulativeTable>,
}

impl std::fmt::Debug for DiffeoDeform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiffeoDeform")
            .field("t0", &self.t0)
            .field("nu", &self.nu)
            .field("nu_star", &self.nu_star)
            .field("mu1", &self.mu1)
            .field("mu2", &self.mu2)
            .finish()
    }
}

impl DiffeoDeform {
    pub fn new(g: &SmoothFn, nu: f64) -> Result<DiffeoDeform> {
        let (lo, t0) = g.domain();
        if lo != 0.0 || !(t0 > 0.0) {
            return Err(GlError::InvalidParameter(format!("g must live on [0, T0], got [{lo}, {t0}]")));
        }
        let gv = g.clone();
        let gf = move |t: f64| gv.eval(t, 0);
        let mut cuts = vec![0.0];
        cuts.extend(g.features().iter().copied().filter(|&x| x > 0.0 && x < t0));
        cuts.push(t0);
        let pieces: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
        for w in &pieces {
            for k in 0..=32 {
                let t = w.0 + (w.1 - w.0) * k as f64 / 32.0;
                if !(gf(t) > 0.0) {
                    return Err(GlError::NonPositive { t, f: gf(t) });
                }
            }
        }
        let g_table = CumulativeTable::build(&gf, &pieces, 1e-15);
        let total = g_table.total().0;
        if !(nu > 0.0 && nu < total) {
            return Err(GlError::InvalidParameter(format!("nu must lie in (0, T = {total}), got {nu}")));
        }
        let big_g = |t: f64| g_table.eval(&gf, t).0;
        let nu_star = bisect(&|t| big_g(t) - nu, 0.0, t0, 1e-15 * t0)?;
        let mid = 0.5 * (nu_star + t0);
        let a = big_g(mid) - nu;
        let a_prime = a.min(0.5 * nu * (t0 / nu_star - 1.0));
        let b = 0.5 * a_prime;
        let slope = nu / nu_star;
        let c1 = b / (slope * (mid - nu_star));
        let mu1 = mu_solve(&step_down_at, &|_| slope, nu_star, mid, c1)?;
        let c2 = b / a;
        let mu2 = mu_solve(&step_down_at, &gf, nu_star, mid, c2)?;
        let (s, m) = (nu_star, mid);
        let phi1 = move |t: f64| slope * step_down_at(((t - s) / (m - s)).clamp(0.0, 1.0).powf(mu1));
        let phi1_table = CumulativeTable::build(&phi1, &[(s, m)], 1e-15);
        let gv = g.clone();
        let phi2g = move |t: f64| (1.0 - step_down_at(((t - s) / (m - s)).clamp(0.0, 1.0).powf(mu2))) * gv.eval(t, 0);
        let phi2g_table = CumulativeTable::build(&phi2g, &[(s, m)], 1e-15);
        Ok(DiffeoDeform {
            g: g.clone(),
            g_table: Arc::new(g_table),
            t0,
            nu,
            nu_star,
            mid,
            a,
            b,
            mu1,
            mu2,
            phi1_table: Arc::new(phi1_table),
            phi2g_table: Arc::new(phi2g_table),
        })
    }

    fn x(&self, t: f64) -> Jet {
        Jet::affine(t, -self.nu_star / (self.mid - self.nu_star), 1.0 / (self.mid - self.nu_star))
    }

    fn cut(&self, t: f64, mu: f64) -> Jet {
        let x = self.x(t);
        if x.v() <= 0.0 {
            Jet::constant(1.0)
        } else if x.v() >= 1.0 {
            Jet::ZERO
        } else {
            step_down(x.powf(mu))
        }
    }

    /// `g₁ = φ₁ + φ₂ g` with four derivatives.
    pub fn g1_jet(&self, t: f64) -> Jet {
        let slope = self.nu / self.nu_star;
        let phi1 = self.cut(t, self.mu1).scale(slope);
        let phi2 = Jet::constant(1.0) - self.cut(t, self.mu2);
        phi1 + phi2 * self.g.jet(t)
    }

    pub fn g1(&self) -> SmoothFn {
        let me = self.clone();
        let mut feats = self.g.features().to_vec();
        feats.extend([self.nu_star, self.mid]);
        SmoothFn::new(0.0, self.t0, move |t| me.g1_jet(t)).with_features(feats)
    }

    /// `G(t) = ∫_0^t g`.
    pub fn big_g(&self, t: f64) -> f64 {
        let g = &self.g;
        self.g_table.eval(&|s| g.eval(s, 0), t).0
    }

    /// `G₁(t) = ∫_0^t g₁`.
    pub fn big_g1(&self, t: f64) -> f64 {
        let (s, m) = (self.nu_star, self.mid);
        let slope = self.nu / s;
        if t <= s {
            return slope * t;
        }
        let u = t.min(m);
        let x = |t: f64| ((t - s) / (m - s)).clamp(0.0, 1.0);
        let (mu1, mu2) = (self.mu1, self.mu2);
        let g = &self.g;
        let p1 = self.phi1_table.eval(&|t| slope * step_down_at(x(t).powf(mu1)), u).0;
        let p2 = self.phi2g_table.eval(&|t| (1.0 - step_down_at(x(t).powf(mu2))) * g.eval(t, 0), u).0;
        let at = self.nu + p1 + p2;
        if t <= m {
            at
        } else {
            at + self.big_g(t) - self.big_g(m)
        }
    }

    /// Radial profile of `Υ_λ(G)`: `|x| ↦ (1 - λ) G(|x|) + λ G₁(|x|)`.
    pub fn radial(&self, r: f64, lambda: f64) -> f64 {
        (1.0 - lambda) * self.big_g(r) + lambda * self.big_g1(r)
    }

    /// Derivative of the radial profile.
    pub fn radial_derivative(&self, r: f64, lambda: f64) -> f64 {
        (1.0 - lambda) * self.g.eval(r, 0) + lambda * self.g1_jet(r).v()
    }

    /// `Υ_λ(G)` applied to a point of the plane.
    pub fn map_point(&self, p: [f64; 2], lambda: f64) -> [f64; 2] {
        let r = p[0].hypot(p[1]);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let s = self.radial(r, lambda) / r;
        [s * p[0], s * p[1]]
    }
}

/// The deformation for `g` and `ν`.
pub fn diffeodeform(g: &SmoothFn, nu: f64) -> Result<DiffeoDeform> {
    DiffeoDeform::new(g, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;

    #[test]
    fn identity_is_fixed() {
        let g = SmoothFn::constant(0.0, 2.0, 1.0);
        let d = diffeodeform(&g, 0.5).unwrap();
        assert!((d.nu_star - 0.5).abs() < 1e-14);
        assert!((d.mu1 - 1.0).abs() < 1e-9 && (d.mu2 - 1.0).abs() < 1e-9, "{} {}", d.mu1, d.mu2);
        for &t in &[0.1, 0.6, 0.9, 1.2, 1.9] {
            assert!((d.g1_jet(t).v() - 1.0).abs() < 1e-8);
            for &l in &[0.0, 0.5, 1.0] {
                assert!((d.radial(t, l) - t).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn generic_weight() {
        let g = SmoothFn::new(0.0, 1.5, |t| (Jet::var(t) * Jet::var(t)).scale(0.8).add_const(0.4));
        let d = diffeodeform(&g, 0.3).unwrap();
        let total = adaptive_simpson(&|t| g.eval(t, 0), 0.0, 1.5, 1e-15);
        let total1 = adaptive_simpson(&|t| d.g1_jet(t).v(), 0.0, d.nu_star, 1e-15)
            + adaptive_simpson(&|t| d.g1_jet(t).v(), d.nu_star, d.mid, 1e-15)
            + adaptive_simpson(&|t| d.g1_jet(t).v(), d.mid, 1.5, 1e-15);
        assert!((total1 - total).abs() < 1e-10 * total, "{total1} {total}");
        assert!((d.big_g1(1.5) - total).abs() < 1e-10 * total);
        let slope = d.nu / d.nu_star;
        for k in 0..=10 {
            let r = d.nu_star * k as f64 / 10.0;
            assert!((d.radial_derivative(r, 1.0) - slope).abs() < 1e-12);
            assert!((d.radial(r, 1.0) - slope * r).abs() < 1e-12);
        }
        for &r in &[d.mid, 0.5 * (d.mid + 1.5), 1.5] {
            for &l in &[0.0, 0.3, 1.0] {
                assert!((d.radial(r, l) - d.big_g(r)).abs() < 1e-10);
            }
        }
        assert!(d.g1_jet(0.5 * (d.nu_star + d.mid)).v() > 0.0);
        assert!(diffeodeform(&g, 10.0).is_err());
    }
}
