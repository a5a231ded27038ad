use std::sync::Arc;

use crate::error::{GlError, Result};
use crate::mollifier::step_down_at;
use crate::smooth::SmoothFn;

use super::{check, mu_solve, property_grid, Forcing, PropertyCheck, PsiCurve, Shape};

const TOL: f64 = 1e-9;

/// Fraction of each ramp's `∫ C₁/t` that the ramp keeps.
const RAMP_SHARE: f64 = 0.5;

/// The family `ψ_λ = t + λ ∫∫ φ₁` that flattens `ψ_1` at `α`.
///
/// `φ₁` is a negative unit-mass bump on `[α/10, α]` followed by
/// `C₁/t` on `[α, t₀]` with flat ramps on `[α, α₁]` and `[t₁, t₀]`, where
/// each ramp keeps half of its `∫ C₁/t = 0.1`, so that `∫_α^{t₀} φ₁ = 1`.
#[derive(Clone, Debug)]
pub struct DefLemma2 {
    pub c1: f64,
    pub t_star: f64,
    pub alpha: f64,
    pub alpha1: f64,
    pub t0: f64,
    pub t1: f64,
    pub mu1: f64,
    pub mu2: f64,
    forcing: Arc<Forcing>,
}

impl DefLemma2 {
    pub fn new(c1: f64, t_star: f64) -> Result<DefLemma2> {
        if !(c1 > 0.0 && c1 <= 1.0) {
            return Err(GlError::InvalidParameter(format!("C1 must lie in (0, 1], got {c1}")));
        }
        if !(t_star > 0.0 && t_star.is_finite()) {
            return Err(GlError::InvalidParameter(format!("t* must be positive, got {t_star}")));
        }
        let alpha = 0.45 * t_star * (-1.1 / c1).exp();
        if !(alpha > 0.0) {
            return Err(GlError::CollarScaleUnderflow { log10_alpha: (0.45 * t_star).log10() - 1.1 / c1 / std::f64::consts::LN_10 });
        }
        let t0 = alpha * (1.1 / c1).exp();
        let alpha1 = alpha * (0.1 / c1).exp();
        let t1 = t0 * (-0.1 / c1).exp();
        let recip = |t: f64| c1 / t;
        let mu1 = mu_solve(&step_down_at, &recip, alpha, alpha1, RAMP_SHARE)?;
        let mu2 = mu_solve(&step_down_at, &recip, t1, t0, RAMP_SHARE)?;
        let w = 0.9 * alpha;
        let forcing = Forcing::new()
            .shape(Shape::Bump, -1.0 / w, 0.1 * alpha, w)
            .ramp(c1, alpha, alpha1, mu1, true)
            .recip(c1, alpha1, t1)
            .ramp(c1, t1, t0, mu2, false);
        Ok(DefLemma2 { c1, t_star, alpha, alpha1, t0, t1, mu1, mu2, forcing: Arc::new(forcing) })
    }

    /// `∫_α^{t₀} φ₁`, which the construction makes 1.
    pub fn ramp_mass(&self) -> f64 {
        self.forcing.moments(self.t0).0 - self.forcing.moments(self.alpha).0
    }

    pub fn psi_at(&self, t: f64, lambda: f64) -> f64 {
        self.forcing.psi_jet(t, lambda).v()
    }

    pub fn member(&self, lambda: f64) -> Result<PsiCurve> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(GlError::Domain { t: lambda, a: 0.0, b: 1.0 });
        }
        // ψ' = 1 past t₀.
        let t_end = self.t0 + (self.t_star - self.psi_at(self.t0, lambda));
        let f = self.forcing.clone();
        let mut feats = f.features();
        feats.push(t_end);
        let psi = SmoothFn::new(0.0, t_end, move |t| f.psi_jet(t, lambda)).with_features(feats);
        Ok(PsiCurve { lambda, t_end, t_star: self.t_star, psi })
    }

    /// Properties (1)–(6), plus `ψ_λ(t₀) ≤ 0.9 t*` reported as property 7.
    pub fn properties(&self, lambda: f64, n: usize) -> Result<Vec<PropertyCheck>> {
        let m = self.member(lambda)?;
        let ts = self.t_star;
        let grid = property_grid(m.t_end, n, m.psi.features());
        let jets: Vec<_> = grid.iter().map(|&t| (t, m.psi.jet(t))).collect();
        let inside = |x: f64, a: f64, b: f64| x >= a && x <= b;
        let mut out = Vec::with_capacity(7);
        let jt = m.psi.jet(m.t_end);
        out.push(check(1, [m.psi.eval(0.0, 0).abs() - 1e-12, (jt.v() - ts).abs() - 1e-8 * ts.max(1.0)]));
        out.push(check(2, jets.iter().map(|(t, j)| if lambda == 0.0 { (j.v() - t).abs() - 1e-12 } else { 0.0 })));
        out.push(check(3, jets.iter().filter(|(t, _)| *t > 0.0).map(|(t, j)| j.d(2) - self.c1 / t * (1.0 + TOL))));
        out.push(check(
            4,
            jets.iter()
                .filter(|(_, j)| inside(j.v(), 0.0, self.alpha / 10.0) || inside(j.v(), 0.9 * ts, ts))
                .map(|(_, j)| (j.d(1) - 1.0).abs() - TOL),
        ));
        out.push(check(5, jets.iter().map(|(_, j)| (-j.d(1)).max(j.d(1) - 1.0) - TOL)));
        let flat = if lambda == 1.0 { self.flatness() } else { 0.0 };
        out.push(check(6, [flat - 1e-6]));
        out.push(check(7, [self.psi_at(self.t0, lambda) - 0.9 * ts]));
        Ok(out)
    }

    /// `max_{j=1..4} |ψ_1^{(j)}(α)|` from exact jets.
    pub fn flatness(&self) -> f64 {
        let j = self.forcing.psi_jet(self.alpha, 1.0);
        (1..5).map(|k| j.d(k).abs()).fold(0.0, f64::max)
    }
}

/// Member `λ` of the family together with `α`.
pub fn def_lemma2_family(c1: f64, t_star: f64, lambda: f64) -> Result<(PsiCurve, f64)> {
    let l = DefLemma2::new(c1, t_star)?;
    Ok((l.member(lambda)?, l.alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_constants() {
        let l = DefLemma2::new(1.0, 0.2).unwrap();
        assert!((l.alpha - 0.09 * (-1.1f64).exp()).abs() < 1e-16);
        assert!((l.alpha - 0.029958).abs() < 5e-7);
        for &c1 in &[0.1, 0.3, 0.7, 1.0] {
            let l = DefLemma2::new(c1, 0.2).unwrap();
            assert!((l.t0 - 0.09).abs() < 1e-15, "{}", l.t0);
            assert!((l.ramp_mass() - 1.0).abs() < 1e-11, "{}", l.ramp_mass());
        }
    }

    #[test]
    fn identity_and_flatness() {
        let l = DefLemma2::new(0.5, 0.2).unwrap();
        let m = l.member(0.0).unwrap();
        assert_eq!(m.t_end, 0.2);
        assert!((m.psi.eval(0.137, 0) - 0.137).abs() < 1e-15);
        assert!(l.flatness() < 1e-10, "{}", l.flatness());
        // Finite differences of ψ_1 agree for the first two orders.
        let m = l.member(1.0).unwrap();
        let h = 1e-3 * l.t_star;
        let p = |t: f64| m.psi.eval(t, 0);
        let d1 = (p(l.alpha + h) - p(l.alpha - h)) / (2.0 * h);
        let d2 = (p(l.alpha + h) - 2.0 * p(l.alpha) + p(l.alpha - h)) / (h * h);
        assert!(d1.abs() < 1e-6 && d2.abs() < 1e-3, "{d1} {d2}");
    }

    #[test]
    fn all_properties_hold() {
        for &c1 in &[0.1, 0.5, 1.0] {
            for &ts in &[0.05, 0.2] {
                let l = DefLemma2::new(c1, ts).unwrap();
                for i in 0..=4 {
                    let lam = i as f64 / 4.0;
                    for p in l.properties(lam, 2048).unwrap() {
                        assert!(p.holds, "C1={c1} t*={ts} λ={lam}: {p:?}");
                    }
                }
            }
        }
    }
}
