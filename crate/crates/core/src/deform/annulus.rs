use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::bump;
use crate::smooth::SmoothFn;
use crate::warped::{CurvatureReport, GridPolicy, WarpingProfile};

use super::locd::{stage, NU_MARGIN};
use super::{annulus_pullback, neck_slope, AnnulusMap, Neck, ProfileChain};

const THETA_SAMPLES: usize = 16;

/// Tolerance for `f ≡ r₀` near the boundary.
const COLLAR_TOL: f64 = 1e-12;
const MAX_STRETCH_DOUBLINGS: usize = 40;

/// Deformation of an annular metric `dt² + f² dξ²`, with `f ≡ r₀` near both
/// ends, to the product `dt² + r₀² dξ²`, keeping `κ > B`.
///
/// The core `[t₁ + ε, t₂ - ε]` is carried as `ν_μ²(A² dx² + f_θ² dξ²)` with
/// `f_θ = (1 - θ) f + θ r₀`, joined to boundary collars of width `δ = ε/2` by
/// necks. Five stages: shrink the radius by `ν` (with `A = 1/ν_μ`, so only
/// the fibre shrinks); stretch to `A'`; interpolate `θ: 0 → 1`; undo `ν`;
/// undo the stretch.
#[derive(Clone, Debug)]
pub struct AnnulusDeform {
    pub inner: f64,
    pub len: f64,
    pub dim: usize,
    pub floor: f64,
    pub r0: f64,
    /// Width of the boundary collars where `f ≡ r₀`.
    pub eps: f64,
    pub delta: f64,
    /// Neck bend width over the neck's smaller radius; `ε/8` at radius `r₀`.
    pub w_frac: f64,
    pub slope: f64,
    pub stretch: f64,
    pub nu: f64,
    core: ProfileChain,
}

fn collar_width(u: &crate::smooth::SmoothFn, len: f64, r0: f64) -> Option<f64> {
    let flat = |t: f64| {
        let j = u.jet(t);
        (j.d(0) - r0).abs() <= COLLAR_TOL * r0 && j.d(1).abs() <= COLLAR_TOL && j.d(2).abs() <= COLLAR_TOL
    };
    (0..=200).map(|j| 0.25 * len * 2f64.powf(-j as f64 / 4.0)).find(|&e| {
        (0..=64).all(|i| {
            let s = e * i as f64 / 64.0;
            flat(s) && flat(len - s)
        })
    })
}

impl AnnulusDeform {
    pub fn new(h: &WarpingProfile, floor: f64) -> Result<AnnulusDeform> {
        let (a, b) = h.domain();
        if h.is_disc() {
            return Err(GlError::InvalidParameter("annulus deformation needs an annulus profile".into()));
        }
        if !h.unit_speed && (0..=256).any(|i| (h.g.eval(a + (b - a) * i as f64 / 256.0, 0) - 1.0).abs() > COLLAR_TOL) {
            return Err(GlError::Precondition("boundary conditions: g must be identically 1".into()));
        }
        AnnulusDeform::from_chain(ProfileChain::new().push(&h.f, a, b), a, h.dim, floor)
    }

    /// The annulus `[inner, inner + chain.len()]` given as a unit-speed chain.
    pub fn from_chain(chain: ProfileChain, inner: f64, dim: usize, floor: f64) -> Result<AnnulusDeform> {
        if dim < 3 {
            return Err(GlError::Dimension { need: "n >= 3", got: dim });
        }
        let len = chain.len();
        let u = chain.to_smooth();
        let r0 = u.eval(0.0, 0);
        if !(r0 > 0.0) || (u.eval(len, 0) - r0).abs() > COLLAR_TOL * r0 {
            return Err(GlError::Precondition(format!("boundary conditions: radii {r0} and {} differ", u.eval(len, 0))));
        }
        let eps = collar_width(&u, len, r0)
            .ok_or_else(|| GlError::Precondition("boundary conditions: f is not constant near the boundary".into()))?;
        let n = dim as f64;
        if (n - 1.0) * (n - 2.0) / (r0 * r0) <= floor {
            return Err(GlError::Precondition(format!("the product of radius {r0} does not clear floor {floor}")));
        }
        let policy = GridPolicy::with_uniform(1024);
        let rep = chain.verify(dim, floor, policy)?;
        if !rep.pass {
            return Err(GlError::Precondition(format!("input has min kappa {} <= floor {floor}", rep.min_kappa)));
        }
        let core = chain.split_at(eps).1.split_at(len - 2.0 * eps).0;
        let s_of = |a: f64| -> Result<f64> {
            let mut s = f64::INFINITY;
            for i in 0..=THETA_SAMPLES {
                let th = i as f64 / THETA_SAMPLES as f64;
                s = s.min(core.rescaled(1.0, a, th, r0).verify(dim, 0.0, policy)?.min_kappa);
            }
            Ok(s)
        };
        let mut stretch = 1.0;
        let mut s = s_of(stretch)?;
        let mut doublings = 0;
        while !(s > 0.0) {
            doublings += 1;
            if doublings > MAX_STRETCH_DOUBLINGS {
                return Err(GlError::NoSolution("no stretch makes the interpolation positive".into()));
            }
            stretch *= 2.0;
            s = s_of(stretch)?;
        }
        let mut nu = 1.0;
        if floor > 0.0 {
            for _ in 0..50 {
                nu = (s / ((1.0 + NU_MARGIN) * floor)).sqrt().min(1.0);
                if nu * stretch >= 1.0 {
                    break;
                }
                stretch = 1.0 / nu;
                s = s_of(stretch)?;
            }
            if nu * stretch < 1.0 {
                return Err(GlError::NoSolution("stretch and scale did not settle".into()));
            }
        }
        let w_frac = eps / (8.0 * r0);
        let slope = neck_slope(r0, w_frac, dim, floor)?;
        Ok(AnnulusDeform { inner, len, dim, floor, r0, eps, delta: 0.5 * eps, w_frac, slope, stretch, nu, core })
    }

    /// `(ν_μ, A, θ)` at `λ`.
    pub fn parameters(&self, lambda: f64) -> (f64, f64, f64) {
        let (nu, a) = (self.nu, self.stretch);
        let (k, mu) = stage(lambda, 5);
        match k {
            0 => {
                let nm = 1.0 - (1.0 - nu) * mu;
                (nm, 1.0 / nm, 0.0)
            }
            1 => (nu, 1.0 / nu + (a - 1.0 / nu) * mu, 0.0),
            2 => (nu, a, mu),
            3 => {
                let nm = nu + (1.0 - nu) * mu;
                (nm, a * nu / nm, 1.0)
            }
            _ => (1.0, a * nu + (1.0 - a * nu) * mu, 1.0),
        }
    }

    pub fn chain(&self, lambda: f64) -> Result<ProfileChain> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(GlError::Domain { t: lambda, a: 0.0, b: 1.0 });
        }
        let (nm, a, th) = self.parameters(lambda);
        let r0 = self.r0;
        let chain = ProfileChain::new()
            .constant(r0, self.delta)
            .append(Neck::new(r0, nm * r0, self.w_frac, self.slope).chain())
            .append(self.core.rescaled(nm, a, th, r0))
            .append(Neck::new(nm * r0, r0, self.w_frac, self.slope).chain())
            .constant(r0, self.delta);
        let map = AnnulusMap { len: self.len, chain_len: chain.len(), delta: self.delta };
        if !(map.min_slope() > 0.0) {
            return Err(GlError::NoSolution(format!("chain of length {} cannot be spread over the annulus", chain.len())));
        }
        Ok(chain)
    }

    /// The deformed metric on the original annulus.
    pub fn profile(&self, lambda: f64) -> Result<WarpingProfile> {
        annulus_pullback(&self.chain(lambda)?, self.inner, self.len, self.delta, self.dim)
    }

    pub fn verify(&self, lambda: f64, policy: GridPolicy) -> Result<CurvatureReport> {
        self.chain(lambda)?.verify(self.dim, self.floor, policy)
    }
}

/// The annulus deformation at `λ` for floor `B`.
pub fn annulus_deform(h: &WarpingProfile, floor: f64, lambda: f64) -> Result<WarpingProfile> {
    AnnulusDeform::new(h, floor)?.profile(lambda)
}

/// Cylinder of radius 1 on `[1, 4]` with a bump of height `amp` on `[1.5, 3.5]`.
pub fn bumped_annulus(amp: f64, dim: usize) -> WarpingProfile {
    let f = SmoothFn::new(1.0, 4.0, move |t| bump(Jet::affine(t, -0.75, 0.5)).scale(amp).add_const(1.0)).with_features(vec![1.5, 3.5]);
    let mut h = WarpingProfile::annulus(SmoothFn::constant(1.0, 4.0, 1.0), f, dim).expect("valid annulus");
    h.unit_speed = true;
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::profile_distance;

    #[test]
    fn collar_is_found() {
        let d = AnnulusDeform::new(&bumped_annulus(0.01, 4), 0.0).unwrap();
        assert!(d.eps > 0.35 && d.eps < 0.6, "{}", d.eps);
        assert_eq!(d.r0, 1.0);
    }

    #[test]
    fn endpoints_and_boundary() {
        for floor in [0.0, 2.0] {
            let h = bumped_annulus(0.01, 4);
            let d = AnnulusDeform::new(&h, floor).unwrap();
            let p0 = d.profile(0.0).unwrap();
            assert!(profile_distance(&p0, &h, 601) < 1e-10);
            let p1 = d.profile(1.0).unwrap();
            for i in 0..=300 {
                let t = 1.0 + 3.0 * i as f64 / 300.0;
                assert!((p1.f.eval(t, 0) - 1.0).abs() < 1e-12 && (p1.g.eval(t, 0) - 1.0).abs() < 1e-12);
            }
            for l in [0.2, 0.5, 0.7] {
                let p = d.profile(l).unwrap();
                for i in 0..=20 {
                    for t in [1.0 + d.delta * i as f64 / 20.0, 4.0 - d.delta * i as f64 / 20.0] {
                        assert!((p.f.eval(t, 0) - h.f.eval(t, 0)).abs() < 1e-10);
                        assert!((p.g.eval(t, 0) - 1.0).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn floor_holds() {
        let mut d = AnnulusDeform::new(&bumped_annulus(0.01, 4), 4.5).unwrap();
        for i in 0..=10 {
            let rep = d.verify(i as f64 / 10.0, GridPolicy::with_uniform(512)).unwrap();
            assert!(rep.pass, "{}: {}", i, rep.min_kappa);
        }
        // The same stages with a forced radius shrink.
        d.nu = 0.8;
        d.stretch = d.stretch.max(1.25);

        for i in 0..=20 {
            let rep = d.verify(i as f64 / 20.0, GridPolicy::with_uniform(512)).unwrap();
            assert!(rep.pass, "{}: {}", i, rep.min_kappa);
        }
    }

    #[test]
    fn product_input_is_fixed() {
        let mut h = WarpingProfile::annulus(SmoothFn::constant(1.0, 3.0, 1.0), SmoothFn::constant(1.0, 3.0, 0.7), 5).unwrap();
        h.unit_speed = true;
        let d = AnnulusDeform::new(&h, 1.0).unwrap();
        for l in [0.0, 0.3, 0.6, 1.0] {
            assert!(profile_distance(&d.profile(l).unwrap(), &h, 201) < 1e-12);
        }
    }

    #[test]
    fn rejects_open_ends() {
        let mut h = WarpingProfile::annulus(SmoothFn::constant(1.0, 3.0, 1.0), SmoothFn::new(1.0, 3.0, |t| Jet::var(t).scale(0.1).add_const(1.0)), 4).unwrap();
        h.unit_speed = true;
        assert!(matches!(AnnulusDeform::new(&h, 0.0), Err(GlError::Precondition(_))));
    }
}
