use std::sync::Arc;

use crate::error::{GlError, Result};
use crate::mollifier::plateau_moments;
use crate::smooth::SmoothFn;

use super::{check, property_grid, Forcing, PropertyCheck, PsiCurve, Shape};

/// Slack allowed in the pointwise property checks.
const TOL: f64 = 1e-9;

/// The family `ψ̃_{λ,α}` that trades slope near the centre for a positive
/// bump of `ψ''` near `0.8 t*`.
///
/// `ψ̃'' ` is a negative plateau on `[α t*/40, α t*/20]` removing slope
/// `λ C` and a positive plateau of height `λ C₁` and width `t*/20` starting
/// where `ψ̃ = 0.8 t*`, which restores it. The plateau is `φ_0(y) = P(20 y)`
/// with `P` the flat-topped bump, so `C = C₁ t* K` with `K = (1/20) ∫ P`.
#[derive(Clone, Debug)]
pub struct DefLemma1 {
    pub c1: f64,
    pub t_star: f64,
    pub alpha: f64,
    /// `C(C₁, t*)`.
    pub c: f64,
}

impl DefLemma1 {
    pub fn new(c1: f64, t_star: f64, alpha: f64) -> Result<DefLemma1> {
        if !(c1 > 0.0 && c1 <= 1.0) {
            return Err(GlError::InvalidParameter(format!("C1 must lie in (0, 1], got {c1}")));
        }
        if !(t_star > 0.0 && t_star.is_finite()) {
            return Err(GlError::InvalidParameter(format!("t* must be positive, got {t_star}")));
        }
        if !(alpha > 0.0 && alpha < 0.5 * t_star) {
            return Err(GlError::InvalidParameter(format!("alpha must lie in (0, t*/2), got {alpha}")));
        }
        let c = c1 * t_star * plateau_constant();
        Ok(DefLemma1 { c1, t_star, alpha, c })
    }

    fn negative(&self, lambda: f64) -> Forcing {
        let w = self.alpha * self.t_star / 40.0;
        Forcing::new().shape(Shape::Plateau, -2.0 / self.alpha * lambda * self.c1, w, w)
    }

    /// Start `t_λ` of the positive plateau: the point where `ψ̃ = 0.8 t*`.
    pub fn t_lambda(&self, lambda: f64) -> f64 {
        let e = self.alpha * self.t_star / 20.0;
        let psi_e = self.negative(lambda).psi_jet(e, 1.0).v();
        e + (0.8 * self.t_star - psi_e) / (1.0 - lambda * self.c)
    }

    fn forcing(&self, lambda: f64) -> Forcing {
        self.negative(lambda).shape(Shape::Plateau, lambda * self.c1, self.t_lambda(lambda), self.t_star / 20.0)
    }

    pub fn member(&self, lambda: f64) -> Result<PsiCurve> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(GlError::Domain { t: lambda, a: 0.0, b: 1.0 });
        }
        let f = Arc::new(self.forcing(lambda));
        let end = self.t_lambda(lambda) + self.t_star / 20.0;
        // Past the last plateau the slope is back to 1.
        let t_end = end + (self.t_star - f.psi_jet(end, 1.0).v());
        let mut feats = f.features();
        feats.push(t_end);
        let g = f.clone();
        let psi = SmoothFn::new(0.0, t_end, move |t| g.psi_jet(t, 1.0)).with_features(feats);
        Ok(PsiCurve { lambda, t_end, t_star: self.t_star, psi })
    }

    /// Properties (1)–(8) on a grid of `n` points refined between breakpoints.
    pub fn properties(&self, lambda: f64, n: usize) -> Result<Vec<PropertyCheck>> {
        let m = self.member(lambda)?;
        let ts = self.t_star;
        let grid = property_grid(m.t_end, n, m.psi.features());
        let jets: Vec<_> = grid.iter().map(|&t| (t, m.psi.jet(t))).collect();
        let inside = |x: f64, a: f64, b: f64| x >= a && x <= b;
        let (a40, a20) = (self.alpha * ts / 40.0, self.alpha * ts / 20.0);
        let mut out = Vec::with_capacity(8);
        let j0 = m.psi.jet(0.0);
        let jt = m.psi.jet(m.t_end);
        out.push(check(1, [j0.v().abs() - 1e-12, (jt.v() - ts).abs() - 1e-8 * ts.max(1.0)]));
        out.push(check(2, jets.iter().map(|(t, j)| if lambda == 0.0 { (j.v() - t).abs() - 1e-12 } else { 0.0 })));
        out.push(check(3, jets.iter().map(|(_, j)| j.d(2) - self.c1 * (1.0 + TOL))));
        out.push(check(4, jets.iter().filter(|(t, _)| inside(*t, a40, a20)).map(|(_, j)| j.d(2) - TOL)));
        out.push(check(
            5,
            jets.iter().filter(|(_, j)| inside(j.v(), 0.8 * ts, 0.9 * ts)).map(|(_, j)| -j.d(2) - TOL),
        ));
        out.push(check(
            6,
            jets.iter()
                .filter(|(_, j)| inside(j.v(), 0.0, a40) || inside(j.v(), 0.9 * ts, ts))
                .map(|(_, j)| (j.d(1) - 1.0).abs() - TOL),
        ));
        let low = 1.0 - self.c;
        out.push(check(7, std::iter::once(-low).chain(jets.iter().map(|(_, j)| low - j.d(1) - TOL))));
        let slope = 1.0 - lambda * self.c;
        out.push(check(
            8,
            jets.iter()
                .filter(|(t, _)| inside(*t, self.alpha / 10.0, 0.8 * ts))
                .map(|(_, j)| (j.d(1) - slope).abs().max(j.d(2).abs()) - TOL),
        ));
        Ok(out)
    }
}

/// `K = ∫_0^{1/20} φ_0 = (1/20) ∫_0^1 P`.
pub fn plateau_constant() -> f64 {
    plateau_moments(1.0).0 / 20.0
}

/// Member `λ` of the family together with `C(C₁, t*)`.
pub fn def_lemma1_family(c1: f64, t_star: f64, alpha: f64, lambda: f64) -> Result<(PsiCurve, f64)> {
    let l = DefLemma1::new(c1, t_star, alpha)?;
    Ok((l.member(lambda)?, l.c))
}
