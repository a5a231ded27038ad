use serde::{Deserialize, Serialize};

use crate::error::{GlError, Result};
use crate::par;
use crate::smooth::SmoothFn;
use crate::warped::{
    is_locally_torpedo, make_torpedo, min_scalar_curvature_with, profile_distance, pull_back_dilation, CurvatureReport, GridPolicy,
    TorpedoSpec, WarpingProfile,
};

use super::{disc_pullback, AnnulusDeform, CollarDeform, DiscMap, LocdDeform, ProfileChain};

/// Width of the outer annulus left untouched, as a fraction of `T₀`.
pub const OUTER_COLLAR: f64 = 0.1;

/// One row of a deformation trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub lambda: f64,
    pub min_kappa: f64,
    pub argmin_t: f64,
    pub c_value: f64,
}

/// `Ψ(h, t)`: `Ψ₁(h, 2t)` on the first half, `Ψ₂(Ψ₁(h, 1), 2t - 1)` on the
/// second, each pulled back to `[0, T₀]` by the radial map [`DiscMap`].
#[derive(Clone, Debug)]
pub struct Locdef {
    pub h: WarpingProfile,
    pub floor: f64,
    /// The fixed torpedo `g₀` of size `T₀`.
    pub g0: TorpedoSpec,
    pub collar: CollarDeform,
    pub locd: LocdDeform,
}

impl Locdef {
    pub fn new(h: &WarpingProfile, floor: f64) -> Result<Locdef> {
        if !h.is_disc() || !h.unit_speed {
            return Err(GlError::InvalidParameter("the deformation needs a unit-speed disc profile".into()));
        }
        let rep = min_scalar_curvature_with(h, floor, GridPolicy::default())?;
        if !rep.pass {
            return Err(GlError::Precondition(format!("input has min kappa {} at t = {}, floor {floor}", rep.min_kappa, rep.argmin)));
        }
        let base = TorpedoSpec::default();
        let g0 = TorpedoSpec::with_eps(h.outer / base.t_unit);
        let collar = CollarDeform::new(h, floor)?;
        let locd = LocdDeform::new(&collar.profile(1.0)?, collar.sigma(), floor, &g0)?;
        Ok(Locdef { h: h.clone(), floor, g0, collar, locd })
    }

    pub fn t0(&self) -> f64 {
        self.h.outer
    }

    /// `Ψ(h, t)` in unit speed, with its own length.
    pub fn chain(&self, t: f64) -> Result<ProfileChain> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GlError::Domain { t, a: 0.0, b: 1.0 });
        }
        if t <= 0.5 {
            let p = self.collar.profile(2.0 * t)?;
            Ok(ProfileChain::new().push(&p.f, 0.0, p.outer))
        } else {
            self.locd.chain(2.0 * t - 1.0)
        }
    }

    /// `Ψ(h, t)` on `[0, T₀]`.
    pub fn profile(&self, t: f64) -> Result<WarpingProfile> {
        disc_pullback(&self.chain(t)?, self.t0(), self.h.dim)
    }

    /// Curvature of `Ψ(h, t)`, read off the unit-speed chain.
    pub fn verify(&self, t: f64, policy: GridPolicy) -> Result<CurvatureReport> {
        self.chain(t)?.verify(self.h.dim, self.floor, policy)
    }

    /// `T₀ / g(0)` for `Ψ(h, t)`; at `t = 1` this is `c(Ψ(h, 1))`.
    pub fn c_value(&self, t: f64) -> Result<f64> {
        let map = DiscMap::new(self.t0(), self.chain(t)?.len());
        Ok(self.t0() / map.k)
    }

    /// The fixed torpedo as a unit-speed profile.
    pub fn torpedo(&self) -> Result<WarpingProfile> {
        make_torpedo(&self.g0, self.h.dim)
    }

    /// `c` with `Ψ(h, 1)` equal to the rescaled torpedo on `D_c`.
    pub fn locally_torpedo(&self, tol: f64) -> Result<Option<f64>> {
        Ok(is_locally_torpedo(&self.profile(1.0)?, &self.torpedo()?.f, tol))
    }

    /// Trace over `samples` equally spaced `t` in `[0, 1]`.
    pub fn trace(&self, samples: usize, policy: GridPolicy) -> Result<Vec<TraceRow>> {
        let ts: Vec<f64> = (0..samples).map(|i| if samples == 1 { 1.0 } else { i as f64 / (samples - 1) as f64 }).collect();
        par::map(policy.exec, &ts, |&t| {
            let rep = self.verify(t, policy)?;
            Ok(TraceRow { lambda: t, min_kappa: rep.min_kappa, argmin_t: rep.argmin, c_value: self.c_value(t)? })
        })
        .into_iter()
        .collect()
    }

    /// `r(h)`: `Ψ(h, 1)` pulled back by the dilation by `c/T₀`, which is `g₀`
    /// on `D_{T₀}`.
    pub fn retraction(&self) -> Result<WarpingProfile> {
        self.deformation_d(1.0)
    }

    /// `D(h, λ)`: `Ψ(h, 2λ)` on the first half, then the dilation factor runs
    /// from 1 to `c/T₀`.
    pub fn deformation_d(&self, lambda: f64) -> Result<WarpingProfile> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(GlError::Domain { t: lambda, a: 0.0, b: 1.0 });
        }
        if lambda <= 0.5 {
            return self.profile(2.0 * lambda);
        }
        let k = 1.0 - (2.0 * lambda - 1.0) * (1.0 - self.c_value(1.0)? / self.t0());
        Ok(pull_back_dilation(&self.profile(1.0)?, k))
    }

    /// Largest `|Δg|, |Δf|` (and first two derivatives) between `Ψ(h, t)` and
    /// `h` on the outer annulus `[(1 - OUTER_COLLAR) T₀, T₀]`.
    pub fn outer_change(&self, t: f64) -> Result<f64> {
        let p = self.profile(t)?;
        let a = (1.0 - OUTER_COLLAR) * self.t0();
        let mut d = 0.0f64;
        for i in 0..=256 {
            let x = a + (self.t0() - a) * i as f64 / 256.0;
            let (f1, f2, g1, g2) = (p.f.jet(x), self.h.f.jet(x), p.g.jet(x), self.h.g.jet(x));
            for k in 0..3 {
                d = d.max((f1.d(k) - f2.d(k)).abs()).max((g1.d(k) - g2.d(k)).abs());
            }
        }
        Ok(d)
    }
}

/// `Ψ(h, t)` for floor `B`.
pub fn locdef(h: &WarpingProfile, floor: f64, t: f64) -> Result<WarpingProfile> {
    Locdef::new(h, floor)?.profile(t)
}

/// `r(h)` for floor `B`.
pub fn retraction(h: &WarpingProfile, floor: f64) -> Result<WarpingProfile> {
    Locdef::new(h, floor)?.retraction()
}

/// `D(h, λ)` for floor `B`.
pub fn deformation_d(h: &WarpingProfile, floor: f64, lambda: f64) -> Result<WarpingProfile> {
    Locdef::new(h, floor)?.deformation_d(lambda)
}

/// Outcome of the `r∘i ≃ Id` model check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyCheck {
    pub c: f64,
    /// Length of the annulus `Ψ(h, 1)` carries outside `D_{T₀}`.
    pub annulus_len: f64,
    /// Minimum curvature along the annulus deformation.
    pub min_kappa: f64,
    /// `sup |f - ε₀|` over the annulus at the end of its deformation.
    pub product_error: f64,
    /// Distance from `h` after the cylinder is contracted.
    pub distance: f64,
    pub pass: bool,
}

/// For `h` in the torpedo model (`h = g₀` on `D_{T₀}`): flatten the annulus
/// that `Ψ(h, 1)` carries beyond `T₀` into a cylinder of radius `ε₀` with
/// [`AnnulusDeform`], contract the cylinder, and compare with `h`.
pub fn retraction_homotopy_check(h: &WarpingProfile, floor: f64, samples: usize, policy: GridPolicy) -> Result<HomotopyCheck> {
    const TOL: f64 = 1e-5;
    let d = Locdef::new(h, floor)?;
    let g0 = d.torpedo()?;
    if is_locally_torpedo(h, &g0.f, 1e-10).map_or(true, |c| (c - d.t0()).abs() > 1e-10 * d.t0()) {
        return Err(GlError::Precondition("input is not the fixed torpedo on its disc".into()));
    }
    let chain = d.chain(1.0)?;
    let cut = chain.joins().first().copied().ok_or_else(|| GlError::NoSolution("Ψ(h, 1) has a single piece".into()))?;
    let (head, ann) = chain.split_at(cut);
    let annulus = AnnulusDeform::from_chain(ann.clone(), cut, h.dim, floor)?;
    let ls: Vec<f64> = (0..samples.max(2)).map(|i| i as f64 / (samples.max(2) - 1) as f64).collect();
    let reps: Vec<Result<CurvatureReport>> = par::map(policy.exec, &ls, |&l| annulus.verify(l, policy));
    let mut min_kappa = f64::INFINITY;
    let mut floors = true;
    for r in reps {
        let r = r?;
        min_kappa = min_kappa.min(r.min_kappa);
        floors &= r.pass;
    }
    let end = annulus.chain(1.0)?.to_smooth();
    let len = end.domain().1;
    let product_error = (0..=1024).map(|i| (end.eval(len * i as f64 / 1024.0, 0) - d.g0.eps).abs()).fold(0.0, f64::max);
    let contracted = head.to_profile(h.dim)?;
    let distance = profile_distance(&contracted, h, 1025);
    Ok(HomotopyCheck {
        c: d.c_value(1.0)?,
        annulus_len: ann.len(),
        min_kappa,
        product_error,
        distance,
        pass: floors && product_error < TOL && distance < TOL,
    })
}

/// The fixed torpedo with a bump of height `amp` on its cylinder, `[2.2, 3.6]`.
pub fn bumped_torpedo(amp: f64, dim: usize) -> Result<WarpingProfile> {
    use crate::jet::Jet;
    use crate::mollifier::bump;
    let g0 = TorpedoSpec::default();
    let f = make_torpedo(&g0, dim)?.f;
    let g = SmoothFn::new(0.0, g0.size(), move |t| f.jet(t) + bump(Jet::affine(t, -2.2 / 1.4, 1.0 / 1.4)).scale(amp)).with_features(vec![2.2, 3.6]);
    WarpingProfile::unit_disc(g, dim)
}

/// Torpedo perturbations in `W` on the disc of the fixed torpedo, named.
pub fn regression_set(dim: usize) -> Result<Vec<(String, WarpingProfile)>> {
    use crate::jet::Jet;
    let g0 = TorpedoSpec::default();
    let t0 = g0.size();
    let tor = make_torpedo(&g0, dim)?;
    let small = |eps: f64| -> Result<WarpingProfile> {
        let f = make_torpedo(&TorpedoSpec::with_eps(eps), dim)?.f;
        let (_, end) = f.domain();
        let g = SmoothFn::new(0.0, t0, move |t| if t <= end { f.jet(t) } else { Jet::constant(eps) });
        WarpingProfile::unit_disc(g.with_features(vec![0.35 * g0.t_unit * eps, 0.45 * g0.t_unit * eps]), dim)
    };
    let t09 = small(0.9)?;
    let t08 = small(0.8)?;
    let bumped = bumped_torpedo(0.02, dim)?;
    let mixed = {
        let (a, b) = (tor.f.clone(), t09.f.clone());
        WarpingProfile::unit_disc(SmoothFn::new(0.0, t0, move |t| (a.jet(t) + b.jet(t)).scale(0.5)), dim)?
    };
    Ok(vec![
        ("torpedo".into(), tor),
        ("torpedo-0.9".into(), t09),
        ("torpedo-0.8".into(), t08),
        ("cylinder-bump".into(), bumped),
        ("cap-mix".into(), mixed),
    ])
}
