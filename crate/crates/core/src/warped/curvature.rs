use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::quad::gl16;
use crate::smooth::SmoothFn;

use super::WarpingProfile;

/// Threshold on `|f' - 1|` below which the centre series replaces the direct
/// formula; `1 - f'^2` then carries too few significant digits.
const SERIES_SWITCH: f64 = 1e-6;

/// Scalar curvature of `dt² + f(t)² dξ²` in dimension `n` from the jet of `f` at `t`.
///
/// Near a smooth centre (`f ≈ t`, `f' ≈ 1`) the odd Taylor expansion
/// `f = t + a t³ + b t⁵` recovered from the jet is used instead.
pub fn kappa_unit_jet(fj: Jet, n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let [f, f1, f2, _, _] = fj.0;
    let near_centre = (f1 - 1.0).abs() < SERIES_SWITCH && t >= 0.0 && (t == 0.0 || (f / t - 1.0).abs() < 1e-4);
    if near_centre && series_fits(fj, t) {
        return kappa_centre_series(fj, n, t);
    }
    (nf - 1.0) * ((nf - 2.0) * (1.0 - f1 * f1) / (f * f) - 2.0 * f2 / f)
}

/// Curvature of `f = t + a t³ + b t⁵` through order `t²`, with `a`, `b` read off the jet at `t`.
pub fn kappa_centre_series(fj: Jet, n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let (f3, f4) = (fj.d(3), fj.d(4));
    let (a, b) = if t == 0.0 { (f3 / 6.0, 0.0) } else { ((f3 - 0.5 * t * f4) / 6.0, f4 / (120.0 * t)) };
    (nf - 1.0) * (-6.0 * a * nf + (nf + 2.0) * (3.0 * a * a - 10.0 * b) * t * t)
}

/// Whether the odd series read off the jet reproduces `f'` and `f''`: a
/// profile can have `f ≈ t`, `f' ≈ 1` at a point far outside the range of
/// its centre expansion.
fn series_fits(fj: Jet, t: f64) -> bool {
    if t == 0.0 {
        return true;
    }
    let (f3, f4) = (fj.d(3), fj.d(4));
    let a = (f3 - 0.5 * t * f4) / 6.0;
    let b = f4 / (120.0 * t);
    let d1 = 3.0 * a * t * t + 5.0 * b * t.powi(4);
    let d2 = 6.0 * a * t + 20.0 * b * t.powi(3);
    let tol = 1e-2;
    (d2 - fj.d(2)).abs() <= tol * d2.abs().max(fj.d(2).abs()) + 1e-300
        && (d1 - (fj.d(1) - 1.0)).abs() <= tol * d1.abs().max((fj.d(1) - 1.0).abs()) + 1e-15
}

fn check_point(f: &SmoothFn, t: f64) -> Result<()> {
    if !f.contains(t) || !t.is_finite() {
        let (a, b) = f.domain();
        return Err(GlError::Domain { t, a, b });
    }
    Ok(())
}

/// Scalar curvature of the unit-speed warped metric `dt² + f² dξ²`.
pub fn scalar_curvature_unit(f: &SmoothFn, n: usize, t: f64) -> Result<f64> {
    check_point(f, t)?;
    if n < 2 {
        return Err(GlError::Dimension { need: "n >= 2", got: n });
    }
    let fj = f.jet(t);
    if !(fj.v() > 0.0) {
        let centre = t == f.domain().0 && fj.v() == 0.0 && (fj.d(1) - 1.0).abs() < 1e-8;
        if !centre {
            return Err(GlError::NonPositive { t, f: fj.v() });
        }
        return Ok(kappa_unit_jet(fj, n, 0.0));
    }
    Ok(kappa_unit_jet(fj, n, t))
}

/// Scalar curvature of `g² dt² + f² dξ²`.
pub fn scalar_curvature_general(h: &WarpingProfile, t: f64) -> Result<f64> {
    check_point(&h.f, t)?;
    let n = h.dim as f64;
    let gj = h.g.jet(t);
    let fj = h.f.jet(t);
    let (g, g1) = (gj.v(), gj.d(1));
    if !(g > 0.0) {
        return Err(GlError::NonPositive { t, f: g });
    }
    let (f, f1, f2) = (fj.v(), fj.d(1), fj.d(2));
    // Close to a smooth centre switch to the unit-speed jet of f ∘ G⁻¹.
    let unit_slope = f1 / g;
    if h.is_disc() && (f <= 0.0 || (unit_slope - 1.0).abs() < SERIES_SWITCH) {
        let s = if t == 0.0 { 0.0 } else { gl16(&|x| h.g.eval(x, 0), 0.0, t) };
        let dg = Jet([0.0, gj.d(0), gj.d(1), gj.d(2), gj.d(3)]);
        let inv = dg.inverse(t);
        let unit = inv.compose(fj);
        if f <= 0.0 && !(t == 0.0 && f == 0.0) {
            return Err(GlError::NonPositive { t, f });
        }
        if f > 0.0 && (unit.v() / s - 1.0).abs() >= 1e-4 {
            // Not near the centre after all.
            return Ok(general_formula(n, g, g1, f, f1, f2));
        }
        return Ok(kappa_unit_jet(unit, h.dim, s));
    }
    if !(f > 0.0) {
        return Err(GlError::NonPositive { t, f });
    }
    Ok(general_formula(n, g, g1, f, f1, f2))
}

fn general_formula(n: f64, g: f64, g1: f64, f: f64, f1: f64, f2: f64) -> f64 {
    (n - 1.0) / (f * f * g * g * g) * ((n - 2.0) * (g * g * g - f1 * f1 * g) - 2.0 * f2 * f * g + 2.0 * f1 * f * g1)
}

/// The pieces of the submersion decomposition of the curvature of `dt² + f² dξ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubmersionInvariants {
    pub normsq_n: f64,
    pub normsq_t: f64,
    pub check_delta_n: f64,
    pub kappa_hat: f64,
}

impl SubmersionInvariants {
    /// `κ̂ - |T|² - |N|² - 2 δ̌N` (the base is one-dimensional and `A = 0`).
    pub fn assemble(&self) -> f64 {
        self.kappa_hat - self.normsq_t - self.normsq_n - 2.0 * self.check_delta_n
    }
}

pub fn warp_submersion_invariants(f: &SmoothFn, n: usize, t: f64) -> Result<SubmersionInvariants> {
    check_point(f, t)?;
    let j = f.jet(t);
    let (v, d1, d2) = (j.v(), j.d(1), j.d(2));
    if !(v > 0.0) {
        return Err(GlError::NonPositive { t, f: v });
    }
    let m = n as f64 - 1.0;
    let r = d1 / v;
    Ok(SubmersionInvariants {
        normsq_n: m * m * r * r,
        normsq_t: m * r * r,
        check_delta_n: m * (d2 / v - r * r),
        kappa_hat: m * (m - 1.0) / (v * v),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionReport {
    pub ok: bool,
    /// `(order, value)` for each failed condition.
    pub defects: Vec<(usize, f64)>,
}

/// Finite-order test that `f` extends to a smooth odd function with `f'(0) = 1`.
pub fn check_smooth_extension(f: &SmoothFn, order: usize, tol: f64) -> ExtensionReport {
    let j = f.jet(0.0);
    let mut defects = Vec::new();
    if j.v().abs() > tol {
        defects.push((0, j.v()));
    }
    if order >= 1 && (j.d(1) - 1.0).abs() > tol {
        defects.push((1, j.d(1)));
    }
    for k in (2..=order.min(4)).step_by(2) {
        if j.d(k).abs() > tol {
            defects.push((k, j.d(k)));
        }
    }
    ExtensionReport { ok: defects.is_empty(), defects }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::WarpingProfile;

    #[test]
    fn series_not_used_inside_a_small_collar() {
        // Jet taken inside a collar bent at scale 1e-10: f ≈ t and f' ≈ 1,
        // but f'' is far from what the centre expansion predicts.
        let fj = Jet([2.3480142499502745e-10, 0.9999991407212132, -1000567.5744869527, -9.173170720408755e17, -5.8982901926951804e29]);
        let t = 2.34801425610262e-10;
        let (f, f1, f2) = (fj.d(0), fj.d(1), fj.d(2));
        let direct = 9.0 * (8.0 * (1.0 - f1 * f1) / (f * f) - 2.0 * f2 / f);
        assert_eq!(kappa_unit_jet(fj, 10, t), direct);
        assert!(direct > 0.0);
    }

    fn sine() -> SmoothFn {
        SmoothFn::new(0.0, 3.0, |t| Jet::var(t).sin())
    }

    #[test]
    fn round_sphere_and_flat() {
        let k = scalar_curvature_unit(&sine(), 3, 0.7).unwrap();
        assert!((k - 6.0).abs() < 1e-12);
        let id = SmoothFn::new(0.0, 1.0, Jet::var);
        assert_eq!(scalar_curvature_unit(&id, 3, 0.5).unwrap(), 0.0);
        let cyl = SmoothFn::constant(0.0, 1.0, 0.5);
        assert!((scalar_curvature_unit(&cyl, 4, 0.3).unwrap() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn centre_limit_and_series_are_accurate() {
        for n in [3usize, 5, 9] {
            let exact = (n * (n - 1)) as f64;
            for &t in &[0.0, 1e-300, 1e-40, 1e-9, 1e-5, 1e-3, 2e-3, 0.1] {
                let k = scalar_curvature_unit(&sine(), n, t).unwrap();
                assert!((k - exact).abs() < 1e-8 * exact, "n={n} t={t} k={k}");
            }
        }
    }

    #[test]
    fn series_matches_direct_formula_away_from_switch() {
        // f = t - t^3/3 + t^5/7: compare series at tiny t with the exact expansion.
        let f = SmoothFn::polynomial(0.0, 1.0, vec![0.0, 1.0, 0.0, -1.0 / 3.0, 0.0, 1.0 / 7.0]);
        let n = 4usize;
        let k0 = scalar_curvature_unit(&f, n, 0.0).unwrap();
        assert!((k0 - (n * (n - 1)) as f64 * 2.0).abs() < 1e-12);
        let k_direct = scalar_curvature_unit(&f, n, 0.05).unwrap();
        let k_series = kappa_centre_series(f.jet(0.05), n, 0.05);
        // At t = 0.05 the direct formula is well conditioned; the series agrees to O(t^4).
        let nf = n as f64;
        let (a, b) = (-1.0 / 3.0, 1.0 / 7.0);
        let series_exact = (nf - 1.0) * (-6.0 * a * nf + (nf + 2.0) * (3.0 * a * a - 10.0 * b) * 0.0025);
        assert!((k_series - series_exact).abs() < 1e-12);
        assert!((k_direct - series_exact).abs() < 1e-3);
    }

    #[test]
    fn general_formula_examples() {
        let g = SmoothFn::constant(0.0, 1.0, 2.0);
        let f = SmoothFn::polynomial(0.0, 1.0, vec![0.0, 2.0]);
        let h = WarpingProfile::disc(g, f, 3).unwrap();
        assert!(scalar_curvature_general(&h, 0.4).unwrap().abs() < 1e-14);
        assert!(scalar_curvature_general(&h, 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn submersion_example() {
        let inv = warp_submersion_invariants(&sine(), 3, std::f64::consts::FRAC_PI_4).unwrap();
        assert!((inv.normsq_n - 4.0).abs() < 1e-12);
        assert!((inv.normsq_t - 2.0).abs() < 1e-12);
        assert!((inv.assemble() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn extension_defects() {
        assert!(check_smooth_extension(&sine(), 4, 1e-8).ok);
        let bad = SmoothFn::polynomial(0.0, 1.0, vec![0.0, 1.0, 1.0]);
        let r = check_smooth_extension(&bad, 4, 1e-8);
        assert!(!r.ok);
        assert_eq!(r.defects, vec![(2, 2.0)]);
    }
}
