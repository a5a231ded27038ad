use std::sync::Arc;

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::step_up;
use crate::smooth::SmoothFn;
use crate::warped::{min_scalar_curvature_with, torpedo_function, CurvatureReport, GridPolicy, TorpedoSpec, WarpingProfile};

use super::{neck_slope, Neck, ProfileChain};

/// Tolerance on `|f^{(j)}(σ)|` for the collar to count as flat.
pub const FLAT_TOL: f64 = 1e-6;
/// Relative margin on the floor used when choosing `ν`.
pub const NU_MARGIN: f64 = 1e-3;
const THETA_SAMPLES: usize = 16;
/// Neck bend width as a multiple of the neck's smaller radius.
const NECK_WIDTH: f64 = 4.0;

type UnitFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

/// `Ψ₂`: replaces the part of `h` inside a flat collar at `σ` by the fixed
/// torpedo `g₀`, joined to the rest of `h` through a neck.
///
/// Four stages, each a quarter of `λ` reparametrized by the flat step:
/// a cylinder of radius `r = f(σ)` grows in at `σ`; the core shrinks by `ν`;
/// the core turns linearly into a torpedo of radius `r`; the torpedo grows to
/// radius `ε₀` while its cylinder is absorbed.
#[derive(Clone)]
pub struct LocdDeform {
    pub h: WarpingProfile,
    pub sigma: f64,
    pub floor: f64,
    pub g0: TorpedoSpec,
    /// `f(σ)`.
    pub r: f64,
    pub nu: f64,
    /// Length of the cylinder that makes room for the torpedo.
    pub l_cyl: f64,
    pub slope: f64,
    /// `min κ` of the unscaled cores over the interpolation.
    pub core_min: f64,
    core: SmoothFn,
    unit: UnitFn,
}

impl std::fmt::Debug for LocdDeform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocdDeform")
            .field("sigma", &self.sigma)
            .field("r", &self.r)
            .field("nu", &self.nu)
            .field("slope", &self.slope)
            .finish()
    }
}

/// Stage index and flat-stepped progress for `λ` split into `stages` equal parts.
pub(crate) fn stage(lambda: f64, stages: usize) -> (usize, f64) {
    let x = lambda * stages as f64;
    let k = (x.floor() as usize).min(stages - 1);
    (k, step_up(Jet::constant(x - k as f64)).v())
}

impl LocdDeform {
    pub fn new(h: &WarpingProfile, sigma: f64, floor: f64, g0: &TorpedoSpec) -> Result<LocdDeform> {
        if !h.is_disc() || !h.unit_speed {
            return Err(GlError::InvalidParameter("local deformation needs a unit-speed disc profile".into()));
        }
        g0.validate()?;
        if !(sigma > 0.0 && sigma < h.outer) {
            return Err(GlError::InvalidParameter(format!("sigma must lie in (0, {}), got {sigma}", h.outer)));
        }
        let f = &h.f;
        let js = f.jet(sigma);
        if let Some(j) = (1..5).find(|&j| js.d(j).abs() >= FLAT_TOL) {
            return Err(GlError::Precondition(format!("f is not flat at sigma: |f^({j})| = {}", js.d(j).abs())));
        }
        for i in 0..=2048 {
            let t = sigma * i as f64 / 2048.0;
            let j = f.jet(t);
            if j.d(1) < -1e-12 || j.d(1) > 1.0 + 1e-12 || j.d(2) > 1e-9 / sigma {
                return Err(GlError::Precondition(format!(
                    "convexity: need 0 <= f' <= 1 and f'' <= 0 on [0, sigma], got f' = {}, f'' = {} at t = {t}",
                    j.d(1),
                    j.d(2)
                )));
            }
        }
        let r = js.d(0);
        let eps0 = g0.eps;
        let l_cyl = r * g0.t_unit;
        let fc = f.clone();
        let mut feats: Vec<f64> = f.features().iter().copied().filter(|&x| x < sigma).collect();
        feats.push(sigma);
        let core = SmoothFn::new(0.0, sigma + l_cyl, move |u| if u <= sigma { fc.jet(u) } else { Jet::constant(r) }).with_features(feats);
        let unit: UnitFn = Arc::new(torpedo_function(&TorpedoSpec { eps: 1.0, ..*g0 }));
        let mut me = LocdDeform { h: h.clone(), sigma, floor, g0: *g0, r, nu: 1.0, l_cyl, slope: 0.0, core_min: 0.0, core, unit };
        let policy = GridPolicy::with_uniform(1024);
        let mut s = f64::INFINITY;
        for i in 0..=THETA_SAMPLES {
            let c = WarpingProfile::unit_disc(me.core_fn(1.0, i as f64 / THETA_SAMPLES as f64), h.dim)?;
            s = s.min(min_scalar_curvature_with(&c, floor, policy)?.min_kappa);
        }
        if !(s > 0.0) {
            return Err(GlError::Precondition(format!("core interpolation has min kappa {s}")));
        }
        me.core_min = s;
        me.nu = if floor > 0.0 { (s / ((1.0 + NU_MARGIN) * floor)).sqrt().min(1.0) } else { 1.0 };
        me.slope = neck_slope(eps0.max(r), NECK_WIDTH, h.dim, floor)?;
        Ok(me)
    }

    /// `ρ F(s/ρ)`, the torpedo of radius `ρ`, on `[0, ρ T]`.
    fn torpedo(&self, rho: f64) -> SmoothFn {
        let unit = self.unit.clone();
        let t = self.g0.t_unit;
        let (a, b) = self.g0.blend;
        SmoothFn::new(0.0, rho * t, move |s| Jet::affine(s, 0.0, 1.0 / rho).compose(unit(s / rho)).scale(rho))
            .with_features(vec![a * rho * t, b * rho * t])
    }

    /// `ν [(1 - θ) f̂(s/ν) + θ r F(s/(ν r))]` on `[0, ν(σ + ℓ)]`, with `f̂` the
    /// input continued by the constant `r` past `σ`.
    fn core_fn(&self, nu: f64, theta: f64) -> SmoothFn {
        let (core, unit, r) = (self.core.clone(), self.unit.clone(), self.r);
        let mut feats: Vec<f64> = self.core.features().iter().map(|x| nu * x).collect();
        feats.extend([self.g0.blend.0 * nu * r * self.g0.t_unit, self.g0.blend.1 * nu * r * self.g0.t_unit]);
        SmoothFn::new(0.0, nu * (self.sigma + self.l_cyl), move |s| {
            let a = Jet::affine(s, 0.0, 1.0 / nu).compose(core.jet(s / nu));
            let b = Jet::affine(s, 0.0, 1.0 / (nu * r)).compose(unit(s / (nu * r))).scale(r);
            (a.scale(1.0 - theta) + b.scale(theta)).scale(nu)
        })
        .with_features(feats)
    }

    fn neck(&self, from: f64) -> ProfileChain {
        Neck::new(from, self.r, NECK_WIDTH, self.slope).chain()
    }

    /// `Ψ₂(h, λ)` as a unit-speed chain.
    pub fn chain(&self, lambda: f64) -> Result<ProfileChain> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(GlError::Domain { t: lambda, a: 0.0, b: 1.0 });
        }
        let f = &self.h.f;
        let (sigma, r, nu) = (self.sigma, self.r, self.nu);
        let rest = ProfileChain::new().push(f, sigma, self.h.outer);
        let (k, mu) = stage(lambda, 4);
        let head = match k {
            0 => ProfileChain::new().push(f, 0.0, sigma).constant(r, mu * (self.l_cyl + 4.0 * NECK_WIDTH * r)),
            1 => {
                let nu_mu = 1.0 - (1.0 - nu) * mu;
                let c = self.core_fn(nu_mu, 0.0);
                ProfileChain::new().push(&c, 0.0, c.domain().1).append(self.neck(nu_mu * r))
            }
            2 => {
                let c = self.core_fn(nu, mu);
                ProfileChain::new().push(&c, 0.0, c.domain().1).append(self.neck(nu * r))
            }
            _ => {
                let rho = if mu >= 1.0 { self.g0.eps } else { (nu * r).powf(1.0 - mu) * self.g0.eps.powf(mu) };
                let t = self.torpedo(rho);
                ProfileChain::new().push(&t, 0.0, t.domain().1).constant(rho, (1.0 - mu) * nu * sigma).append(self.neck(rho))
            }
        };
        Ok(head.append(rest))
    }

    /// `Ψ₂(h, λ)` as a single profile; structure far below the resolution of
    /// its arclength is only exact in [`LocdDeform::chain`].
    pub fn profile(&self, lambda: f64) -> Result<WarpingProfile> {
        self.chain(lambda)?.to_profile(self.h.dim)
    }

    pub fn verify(&self, lambda: f64, policy: GridPolicy) -> Result<CurvatureReport> {
        self.chain(lambda)?.verify(self.h.dim, self.floor, policy)
    }
}

/// `Ψ₂(h, λ)` at collar `σ`, floor `B` and fixed torpedo `g₀`.
pub fn locd_deform(h: &WarpingProfile, lambda: f64, sigma: f64, floor: f64, g0: &TorpedoSpec) -> Result<WarpingProfile> {
    LocdDeform::new(h, sigma, floor, g0)?.profile(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::CollarDeform;
    use crate::warped::make_torpedo;

    fn collared(n: usize, floor: f64) -> (WarpingProfile, f64) {
        let h = make_torpedo(&TorpedoSpec::default(), n).unwrap();
        let d = CollarDeform::new(&h, floor).unwrap();
        (d.profile(1.0).unwrap(), d.sigma())
    }

    #[test]
    fn stages_split_evenly() {
        assert_eq!(stage(0.0, 4), (0, 0.0));
        assert_eq!(stage(1.0, 4), (3, 1.0));
        let (k, mu) = stage(0.375, 4);
        assert_eq!(k, 1);
        assert!((mu - 0.5).abs() < 1e-15);
    }

    #[test]
    fn endpoints() {
        let (h, sigma) = collared(12, 0.0);
        let g0 = TorpedoSpec::default();
        let d = LocdDeform::new(&h, sigma, 0.0, &g0).unwrap();
        let c0 = d.chain(0.0).unwrap();
        assert!((c0.len() - h.outer).abs() < 1e-15);
        let f0 = c0.to_smooth();
        for i in 0..=50 {
            let t = h.outer * i as f64 / 50.0;
            assert!((f0.eval(t, 0) - h.f.eval(t, 0)).abs() < 1e-14);
        }
        let f1 = d.chain(1.0).unwrap().to_smooth();
        let tor = make_torpedo(&g0, 12).unwrap();
        for i in 0..=50 {
            let t = tor.outer * i as f64 / 50.0;
            assert!((f1.eval(t, 0) - tor.f.eval(t, 0)).abs() < 1e-14);
        }
    }

    #[test]
    fn stages_join_continuously() {
        let (h, sigma) = collared(12, 1.0);
        let d = LocdDeform::new(&h, sigma, 1.0, &TorpedoSpec::default()).unwrap();
        for &b in &[0.25, 0.5, 0.75] {
            let (a, c) = (d.chain(b - 1e-12).unwrap(), d.chain(b).unwrap());
            assert!((a.len() - c.len()).abs() < 1e-9, "{b}");
            let (fa, fc) = (a.to_smooth(), c.to_smooth());
            for i in 0..=40 {
                let t = c.len() * i as f64 / 40.0;
                assert!((fa.eval(t.min(a.len()), 0) - fc.eval(t, 0)).abs() < 1e-9, "{b} {t}");
            }
        }
    }

    #[test]
    fn floor_holds_along_the_family() {
        let (h, sigma) = collared(10, 2.0);
        let d = LocdDeform::new(&h, sigma, 2.0, &TorpedoSpec::default()).unwrap();
        for i in 0..=8 {
            let rep = d.verify(i as f64 / 8.0, GridPolicy::with_uniform(512)).unwrap();
            assert!(rep.pass, "λ={}: {} at {}", i as f64 / 8.0, rep.min_kappa, rep.argmin);
        }
    }

    #[test]
    fn rejects_unflat_collar() {
        let h = make_torpedo(&TorpedoSpec::default(), 5).unwrap();
        assert!(matches!(LocdDeform::new(&h, 0.5, 0.0, &TorpedoSpec::default()), Err(GlError::Precondition(_))));
    }
}
