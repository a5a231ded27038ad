//! Flat cutoffs and the second-order families `ψ'' = φ` that bend a
//! warping function's argument.

mod diffeo;
mod forcing;
mod lemma1;
mod lemma2;

pub use diffeo::{diffeodeform, DiffeoDeform};
pub use forcing::{Forcing, Shape};
pub use lemma1::{def_lemma1_family, plateau_constant, DefLemma1};
pub use lemma2::{def_lemma2_family, DefLemma2};

use serde::{Deserialize, Serialize};

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::{bump, step_down};
use crate::quad::{adaptive_simpson, bisect, gl16};
use crate::smooth::SmoothFn;

/// The fixed cutoff `φ₀` (1 below 0, 0 above 1) and unit-mass bump on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct BumpKit {
    pub phi0: SmoothFn,
    pub bump: SmoothFn,
}

impl Default for BumpKit {
    fn default() -> Self {
        BumpKit {
            phi0: SmoothFn::new(0.0, 1.0, |t| step_down(Jet::var(t))),
            bump: SmoothFn::new(0.0, 1.0, |t| bump(Jet::var(t))),
        }
    }
}

/// One member of a `ψ` family: `ψ` on `[0, t_end]` with `ψ(t_end) = t*`.
#[derive(Clone, Debug)]
pub struct PsiCurve {
    pub lambda: f64,
    pub t_end: f64,
    /// `ψ(t_end)`.
    pub t_star: f64,
    pub psi: SmoothFn,
}

impl PsiCurve {
    /// `ψ` continued with slope 1 past `t_end`, on `[0, len]`.
    pub fn extended(&self, len: f64) -> SmoothFn {
        let psi = self.psi.clone();
        let (te, ts) = (self.t_end, self.t_star);
        let mut feats = self.psi.features().to_vec();
        feats.push(te);
        SmoothFn::new(0.0, len, move |t| if t <= te { psi.jet(t) } else { Jet([t - te + ts, 1.0, 0.0, 0.0, 0.0]) }).with_features(feats)
    }
}

/// Outcome of checking one numbered property of a family member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: u8,
    pub holds: bool,
    /// Largest violation found (0 when the property holds with margin).
    pub worst: f64,
}

fn check(property: u8, violations: impl IntoIterator<Item = f64>) -> PropertyCheck {
    let worst = violations.into_iter().fold(0.0f64, |a, v| a.max(v));
    PropertyCheck { property, holds: worst <= 0.0, worst }
}

/// Uniform grid on `[0, t_end]` with every gap between consecutive
/// features subdivided further.
fn property_grid(t_end: f64, n: usize, features: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
    let mut marks: Vec<f64> = features.iter().copied().filter(|x| *x > 0.0 && *x < t_end).collect();
    marks.push(0.0);
    marks.push(t_end);
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    marks.dedup();
    for w in marks.windows(2) {
        for k in 0..=64 {
            g.push(w[0] + (w[1] - w[0]) * k as f64 / 64.0);
        }
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.dedup();
    g
}

/// Exponent `μ > 0` with `∫_a^b φ₀(((t-a)/(b-a))^μ) f(t) dt = c ∫_a^b f`.
///
/// The left side increases from 0 to `∫ f` as `μ` runs over `(0, ∞)`, so
/// the root is bracketed in `ln μ`.
pub fn mu_solve(phi0: &dyn Fn(f64) -> f64, f: &dyn Fn(f64) -> f64, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(GlError::InvalidParameter(format!("c must lie in (0, 1), got {c}")));
    }
    if !(b > a) {
        return Err(GlError::InvalidParameter(format!("empty interval [{a}, {b}]")));
    }
    let rough: f64 = (0..16)
        .map(|i| {
            let h = (b - a) / 16.0;
            gl16(&|t| f(t).abs(), a + i as f64 * h, a + (i + 1) as f64 * h)
        })
        .sum();
    if !(rough > 0.0) {
        return Err(GlError::InvalidParameter("weight function vanishes identically".into()));
    }
    let tol = 1e-14 * rough;
    let total = adaptive_simpson(f, a, b, tol);
    let w = b - a;
    let excess = |ln_mu: f64| {
        let mu = ln_mu.exp();
        let g = |t: f64| {
            let x = ((t - a) / w).clamp(0.0, 1.0);
            phi0(x.powf(mu)) * f(t)
        };
        adaptive_simpson(&g, a, b, tol) - c * total
    };
    let lo = -30.0;
    let hi = 30.0;
    if excess(lo) >= 0.0 || excess(hi) <= 0.0 {
        return Err(GlError::NoBracket { lo: lo.exp(), hi: hi.exp() });
    }
    Ok(bisect(&excess, lo, hi, 1e-13)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::step_down_at;

    #[test]
    fn linear_cutoff_oracle() {
        for &c in &[0.2, 0.5, 0.75] {
            let mu = mu_solve(&|x| 1.0 - x, &|_| 1.0, 0.0, 1.0, c).unwrap();
            let exact = c / (1.0 - c);
            assert!((mu - exact).abs() < 1e-9 * exact, "c={c} mu={mu}");
        }
    }

    #[test]
    fn monotone_in_c() {
        let f = |t: f64| t;
        let m: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&c| mu_solve(&step_down_at, &f, 0.0, 1.0, c).unwrap()).collect();
        assert!(m[0] < m[1] && m[1] < m[2]);
        assert!(mu_solve(&step_down_at, &|_| 0.0, 0.0, 1.0, 0.5).is_err());
        assert!(mu_solve(&step_down_at, &f, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn smooth_cutoff_against_riemann_sum() {
        let mu = mu_solve(&step_down_at, &|t| t, 0.0, 1.0, 0.5).unwrap();
        // Midpoint rule on 10^6 cells.
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let lhs: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                step_down_at(t.powf(mu)) * t * h
            })
            .sum();
        assert!((lhs - 0.25).abs() < 1e-8, "{lhs}");
    }

    #[test]
    fn bump_kit_shapes() {
        let k = BumpKit::default();
        let mass = adaptive_simpson(&|t| k.bump.eval(t, 0), 0.0, 1.0, 1e-14);
        assert!((mass - 1.0).abs() < 1e-10);
        for j in 0..5 {
            assert!(k.phi0.eval(0.0, j) == if j == 0 { 1.0 } else { 0.0 });
            assert_eq!(k.phi0.eval(1.0, j), 0.0);
        }
    }
}
