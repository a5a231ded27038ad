use serde::{Deserialize, Serialize};

use crate::cutoff::{plateau_constant, DefLemma1, DefLemma2};
use crate::error::{GlError, Result};
use crate::quad::{bisect, invert_monotone};
use crate::smooth::SmoothFn;
use crate::warped::{min_scalar_curvature_with, CurvatureReport, GridPolicy, WarpingProfile};

/// Smallest collar scale handled; curvature grows like `α⁻²` and fourth
/// derivatives like `α⁻⁴`.
pub const MIN_LOG10_ALPHA: f64 = -60.0;

const SCAN: usize = 4096;

/// Constants of the collar construction for one profile and floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarConstants {
    pub dim: usize,
    pub floor: f64,
    /// Fixed points of `ρ₀` and `ρ₁`.
    pub t_fix0: f64,
    pub t_fix1: f64,
    pub t_star: f64,
    pub b_bar_prime: f64,
    pub b_prime: f64,
    pub b_dblprime: f64,
    pub c1_tilde: f64,
    pub c1: f64,
    /// `C(C₁, t*)`.
    pub c: f64,
    pub t_dblstar: f64,
    pub c12: f64,
    pub alpha: f64,
    pub sigma: f64,
}

/// First `t` in `(0, hi]` with `t = min_{τ<=t} q(τ)`, or `hi` if there is none.
fn running_min_fixed_point(q: &dyn Fn(f64) -> f64, hi: f64) -> f64 {
    let h = hi / SCAN as f64;
    let mut m = q(0.0);
    for i in 1..=SCAN {
        let t = h * i as f64;
        let next = m.min(q(t));
        if next <= t {
            let lo = t - h;
            let m_lo = m;
            let g = |s: f64| {
                let v = (0..=16).map(|j| q(lo + (s - lo) * j as f64 / 16.0)).fold(m_lo, f64::min);
                v - s
            };
            return bisect(&g, lo, t, 1e-14 * hi).unwrap_or(t);
        }
        m = next;
    }
    hi
}

/// Extremum of `q` over `[a, b]` on a uniform grid, refined between the
/// neighbours of the best node.
fn extremum(q: &dyn Fn(f64) -> f64, a: f64, b: f64, max: bool) -> f64 {
    let better = |x: f64, y: f64| if max { x > y } else { x < y };
    let n = 2048;
    let h = (b - a) / n as f64;
    let mut best = (q(a), 0usize);
    for i in 1..=n {
        let v = q(a + h * i as f64);
        if better(v, best.0) {
            best = (v, i);
        }
    }
    let lo = a + h * best.1.saturating_sub(1) as f64;
    let hi = (a + h * (best.1 + 1) as f64).min(b);
    let mut out = best.0;
    for k in 0..=64 {
        let v = q(lo + (hi - lo) * k as f64 / 64.0);
        if better(v, out) {
            out = v;
        }
    }
    out
}

pub fn collar_constants(h: &WarpingProfile, floor: f64) -> Result<CollarConstants> {
    if !h.is_disc() || !h.unit_speed {
        return Err(GlError::InvalidParameter("collar constants need a unit-speed disc profile".into()));
    }
    if h.dim < 3 {
        return Err(GlError::Dimension { need: "n >= 3", got: h.dim });
    }
    if !(floor >= 0.0) {
        return Err(GlError::InvalidParameter(format!("floor must be nonnegative, got {floor}")));
    }
    let n = h.dim as f64;
    let f = &h.f;
    let big_t = h.outer;
    let j0 = f.jet(0.0);
    let (fp0, f3) = (j0.d(1), j0.d(3));
    if !(fp0 > 0.0 && f3 < 0.0) {
        return Err(GlError::Precondition(format!("not applicable: need f'(0) > 0 and f'''(0) < 0, got {fp0} and {f3}")));
    }
    let q0 = |tau: f64| if tau == 0.0 { 0.5 * big_t } else { f.eval(tau, 2) / (2.0 * f3 * tau) * big_t };
    let q1 = |tau: f64| f.eval(tau, 1) / (2.0 * fp0) * big_t;
    let half = 0.5 * big_t;
    let t_fix0 = running_min_fixed_point(&q0, half);
    let t_fix1 = running_min_fixed_point(&q1, half);
    let t_star = t_fix0.min(t_fix1).min(half);
    if !(t_star > 0.0) {
        return Err(GlError::Precondition("not applicable: t* = 0".into()));
    }
    for i in 1..=SCAN {
        let t = t_star * i as f64 / SCAN as f64;
        let j = f.jet(t);
        let open = t >= 1e-6 * t_star;
        if !(j.d(1) > 0.0) || j.d(1) > 1.0 || (open && j.d(1) >= 1.0) || j.d(2) > 0.0 || (open && j.d(2) >= 0.0) {
            return Err(GlError::Precondition(format!(
                "not applicable: need 0 < f' < 1 and f'' < 0 on (0, t*], got f' = {}, f'' = {} at t = {t}",
                j.d(1),
                j.d(2)
            )));
        }
    }
    let limit = -(n - 2.0) / 2.0 + floor / (2.0 * (n - 1.0) * f3.abs());
    let ratio = |t: f64| {
        let j = f.jet(t);
        let (fv, f1, f2) = (j.d(0), j.d(1), j.d(2));
        ((n - 1.0) * (n - 2.0) * (1.0 - f1 * f1) - floor * fv * fv) / (2.0 * (n - 1.0) * fv * f2)
    };
    let b_bar_prime = extremum(&ratio, 1e-3 * t_star, 0.9 * t_star, true).max(limit);
    let b_prime = b_bar_prime.max(0.5);
    let dbl = |t: f64| {
        let j = f.jet(t);
        let k = h.kappa(t).unwrap_or(f64::NEG_INFINITY);
        j.d(0) * (k - floor) / (8.0 * (n - 1.0) * j.d(1))
    };
    let b_dblprime = extremum(&dbl, 0.4 * 2f64.sqrt() * t_star, 0.9 * t_star, false);
    if b_prime >= 1.0 {
        return Err(GlError::Precondition(format!("not applicable: B' = {b_prime} >= 1")));
    }
    let k = plateau_constant();
    let c1_tilde = (1.0 - (0.5 + 0.5 * b_prime).sqrt()) / (t_star * k);
    let c1 = c1_tilde.min(b_dblprime).min(1.0);
    if !(c1 > 0.0) {
        return Err(GlError::Precondition(format!("not applicable: C1 = {c1} (B'' = {b_dblprime})")));
    }
    let c = c1 * t_star * k;
    let shrink = 1.0 - (1.0 - c) * (1.0 - c);
    let t_dblstar = if floor > 0.0 { (0.8 * t_star).min(((n - 1.0) * shrink / floor).sqrt()) } else { 0.8 * t_star };
    let c12 = ((n - 2.0) / 8.0 * shrink).min(1.0);
    let log10_alpha = (0.45 * t_dblstar).log10() - 1.1 / c12 / std::f64::consts::LN_10;
    if log10_alpha < MIN_LOG10_ALPHA {
        return Err(GlError::CollarScaleUnderflow { log10_alpha });
    }
    let alpha = 0.45 * t_dblstar * (-1.1 / c12).exp();
    Ok(CollarConstants {
        dim: h.dim,
        floor,
        t_fix0,
        t_fix1,
        t_star,
        b_bar_prime,
        b_prime,
        b_dblprime,
        c1_tilde,
        c1,
        c,
        t_dblstar,
        c12,
        alpha,
        sigma: alpha,
    })
}

/// `Ψ₁`: bends the argument of `f` so that it becomes flat to all orders at `σ = α`.
#[derive(Clone, Debug)]
pub struct CollarDeform {
    pub h: WarpingProfile,
    pub constants: CollarConstants,
    lemma1: DefLemma1,
    lemma2: DefLemma2,
}

fn preimages(inner: &SmoothFn, ys: &[f64]) -> Vec<f64> {
    let (lo, hi) = inner.domain();
    let top = inner.eval(hi, 0);
    ys.iter().filter(|&&y| y > 0.0 && y < top).map(|&y| invert_monotone(&|t| inner.eval(t, 0), y, lo, hi)).collect()
}

impl CollarDeform {
    pub fn new(h: &WarpingProfile, floor: f64) -> Result<CollarDeform> {
        let constants = collar_constants(h, floor)?;
        let lemma1 = DefLemma1::new(constants.c1, constants.t_star, constants.alpha)?;
        let lemma2 = DefLemma2::new(constants.c12, constants.t_dblstar)?;
        Ok(CollarDeform { h: h.clone(), constants, lemma1, lemma2 })
    }

    pub fn sigma(&self) -> f64 {
        self.constants.sigma
    }

    /// `Ψ₁(h, λ)`, a unit-speed profile on its own (longer) domain.
    pub fn profile(&self, lambda: f64) -> Result<WarpingProfile> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(GlError::Domain { t: lambda, a: 0.0, b: 1.0 });
        }
        let big_t = self.h.outer;
        let f = &self.h.f;
        let (inner, mut feats) = if lambda <= 0.5 {
            let m = self.lemma1.member(2.0 * lambda)?;
            let inner = m.extended(big_t + m.t_end - m.t_star);
            let feats = inner.features().to_vec();
            (inner, feats)
        } else {
            let m1 = self.lemma1.member(1.0)?;
            let m2 = self.lemma2.member(2.0 * lambda - 1.0)?;
            let len1 = big_t + m1.t_end - m1.t_star;
            let i1 = m1.extended(len1);
            let i2 = m2.extended(len1 + m2.t_end - m2.t_star);
            let mut feats = i2.features().to_vec();
            feats.extend(preimages(&i2, i1.features()));
            (i1.compose(&i2), feats)
        };
        feats.extend(preimages(&inner, f.features()));
        let out = f.compose(&inner).with_features(feats);
        WarpingProfile::unit_disc(out, self.h.dim)
    }

    pub fn verify(&self, lambda: f64, policy: GridPolicy) -> Result<CurvatureReport> {
        min_scalar_curvature_with(&self.profile(lambda)?, self.constants.floor, policy)
    }

    /// `max_{j=1..4} |f̃^{(j)}(σ)|` for `Ψ₁(h, 1)`.
    pub fn flatness(&self) -> Result<f64> {
        let j = self.profile(1.0)?.f.jet(self.sigma());
        Ok((1..5).map(|k| j.d(k).abs()).fold(0.0, f64::max))
    }
}

/// `Ψ₁(h, λ)` for floor `B`.
pub fn collar_deform(h: &WarpingProfile, floor: f64, lambda: f64) -> Result<WarpingProfile> {
    CollarDeform::new(h, floor)?.profile(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::{make_torpedo, profile_distance, TorpedoSpec};

    #[test]
    fn fixed_points_on_the_unit_torpedo() {
        let h = make_torpedo(&TorpedoSpec::default(), 5).unwrap();
        let c = collar_constants(&h, 0.0).unwrap();
        let half = 0.5 * h.outer;
        // ρ₁(t) = (T/2) cos t on the cap, so t₁ = (T/2) cos t₁.
        assert!((c.t_fix1 - half * c.t_fix1.cos()).abs() < 1e-10, "{}", c.t_fix1);
        assert_eq!(c.t_star, c.t_fix0.min(c.t_fix1).min(half));
        assert!(c.t_star <= half && c.alpha < 0.5 * c.t_dblstar && c.sigma == c.alpha);
        assert!(1.0 - c.c >= (0.5 + 0.5 * c.b_prime).sqrt() - 1e-15);
        assert!(c.b_bar_prime.is_finite());
    }

    #[test]
    fn b_dblprime_decreases_with_the_floor() {
        let h = make_torpedo(&TorpedoSpec::default(), 6).unwrap();
        let a = collar_constants(&h, 1.0).unwrap();
        let b = collar_constants(&h, 2.0).unwrap();
        assert!(b.b_dblprime < a.b_dblprime);
    }

    #[test]
    fn low_dimension_underflows() {
        let h = make_torpedo(&TorpedoSpec::default(), 3).unwrap();
        assert!(matches!(collar_constants(&h, 0.0), Err(GlError::CollarScaleUnderflow { .. })));
    }

    #[test]
    fn identity_and_flat_collar() {
        let h = make_torpedo(&TorpedoSpec::default(), 7).unwrap();
        let d = CollarDeform::new(&h, 0.0).unwrap();
        let p0 = d.profile(0.0).unwrap();
        assert_eq!(p0.outer, h.outer);
        assert!(profile_distance(&p0, &h, 2001) < 1e-10);
        assert!(d.flatness().unwrap() < 1e-6, "{}", d.flatness().unwrap());
    }
}
