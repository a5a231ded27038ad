//! Warped metrics `h = g(t)² dt² + f(t)² dξ²` on discs and annuli.

mod curvature;
mod grid;
mod torpedo;

pub use curvature::{
    check_smooth_extension, kappa_centre_series, kappa_unit_jet, scalar_curvature_general, scalar_curvature_unit, warp_submersion_invariants,
    ExtensionReport, SubmersionInvariants,
};
pub use grid::{min_scalar_curvature, min_scalar_curvature_with, verification_grid, CurvatureReport, GridPolicy};
pub use torpedo::{make_torpedo, torpedo_function, TorpedoSpec};

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::quad::gl16;
use crate::smooth::SmoothFn;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileKind {
    Disc,
    Annulus { inner: f64 },
}

/// A warped metric on a disc `D_T` or annulus `D_[T_inner, T]`.
#[derive(Clone, Debug)]
pub struct WarpingProfile {
    pub g: SmoothFn,
    pub f: SmoothFn,
    pub outer: f64,
    pub dim: usize,
    pub kind: ProfileKind,
    /// `g ≡ 1`; curvature then uses the unit-speed formula directly.
    pub unit_speed: bool,
}

impl WarpingProfile {
    /// Disc profile with `g ≡ 1`.
    pub fn unit_disc(f: SmoothFn, dim: usize) -> Result<WarpingProfile> {
        let (a, b) = f.domain();
        if a != 0.0 {
            return Err(GlError::InvalidParameter(format!("disc profile must start at 0, got {a}")));
        }
        check_dim(dim)?;
        Ok(WarpingProfile { g: SmoothFn::constant(0.0, b, 1.0), f, outer: b, dim, kind: ProfileKind::Disc, unit_speed: true })
    }

    pub fn disc(g: SmoothFn, f: SmoothFn, dim: usize) -> Result<WarpingProfile> {
        let (a, b) = f.domain();
        if a != 0.0 {
            return Err(GlError::InvalidParameter(format!("disc profile must start at 0, got {a}")));
        }
        check_dim(dim)?;
        Ok(WarpingProfile { g, f, outer: b, dim, kind: ProfileKind::Disc, unit_speed: false })
    }

    pub fn annulus(g: SmoothFn, f: SmoothFn, dim: usize) -> Result<WarpingProfile> {
        let (a, b) = f.domain();
        if !(a > 0.0 && a < b) {
            return Err(GlError::InvalidParameter(format!("annulus needs 0 < T_inner < T, got [{a}, {b}]")));
        }
        check_dim(dim)?;
        Ok(WarpingProfile { g, f, outer: b, dim, kind: ProfileKind::Annulus { inner: a }, unit_speed: false })
    }

    pub fn inner(&self) -> f64 {
        match self.kind {
            ProfileKind::Disc => 0.0,
            ProfileKind::Annulus { inner } => inner,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.inner(), self.outer)
    }

    pub fn is_disc(&self) -> bool {
        matches!(self.kind, ProfileKind::Disc)
    }

    /// Scalar curvature at `t`.
    pub fn kappa(&self, t: f64) -> Result<f64> {
        if self.unit_speed {
            scalar_curvature_unit(&self.f, self.dim, t)
        } else {
            scalar_curvature_general(self, t)
        }
    }

    /// Arclength `∫_inner^t g`.
    pub fn arclength(&self, t: f64) -> f64 {
        if self.unit_speed {
            return t - self.inner();
        }
        let a = self.inner();
        let pieces = 64;
        let h = (t - a) / pieces as f64;
        let g = |x: f64| self.g.eval(x, 0);
        (0..pieces).map(|i| gl16(&g, a + h * i as f64, a + h * (i + 1) as f64)).sum()
    }

    /// The same metric in arclength: `f` resampled at `samples` nodes and
    /// splined against `s = ∫ g`, which starts at the inner radius.
    pub fn to_unit_speed(&self, samples: usize) -> Result<WarpingProfile> {
        if self.unit_speed {
            return Ok(self.clone());
        }
        let (a, b) = self.domain();
        let n = samples.max(8);
        let h = (b - a) / n as f64;
        let g = |x: f64| self.g.eval(x, 0);
        let mut s = vec![a];
        let mut f = vec![self.f.eval(a, 0)];
        for i in 0..n {
            let (x0, x1) = (a + h * i as f64, a + h * (i + 1) as f64);
            s.push(s[i] + gl16(&g, x0, x1));
            f.push(self.f.eval(x1, 0));
        }
        let f = SmoothFn::sampled(&s, &f)?;
        let len = s[n] - a;
        Ok(WarpingProfile {
            g: SmoothFn::constant(a, a + len, 1.0),
            f,
            outer: a + len,
            dim: self.dim,
            kind: self.kind,
            unit_speed: true,
        })
    }

    /// Features of both coefficient functions.
    pub fn features(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.f.features().iter().chain(self.g.features()).copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// Homothety `c² h`: the same coordinates, radial coefficient and fibre radius scaled by `c`.
    pub fn scaled(&self, c: f64) -> WarpingProfile {
        let mut out = self.clone();
        out.g = self.g.scaled(c);
        out.f = self.f.scaled(c);
        out.unit_speed = false;
        out
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(GlError::Dimension { need: "n >= 2", got: dim });
    }
    Ok(())
}

/// Sup over a uniform grid of the differences of `g` and `f` and their first
/// two derivatives.
pub fn profile_distance(h1: &WarpingProfile, h2: &WarpingProfile, points: usize) -> f64 {
    let (a, b) = h1.domain();
    let mut d = 0.0f64;
    for i in 0..points {
        let t = a + (b - a) * i as f64 / (points - 1) as f64;
        let (g1, g2, f1, f2) = (h1.g.jet(t), h2.g.jet(t), h1.f.jet(t), h2.f.jet(t));
        for k in 0..3 {
            d = d.max((g1.d(k) - g2.d(k)).abs()).max((f1.d(k) - f2.d(k)).abs());
        }
    }
    d
}

/// If `h` is locally torpedo for the fixed torpedo `f0` (of size `T₀ = f0`'s
/// domain length), return `c` with `h = ((T₀/c)², f₀(T₀ t/c)²)` on `D_c`.
pub fn is_locally_torpedo(h: &WarpingProfile, f0: &SmoothFn, tol: f64) -> Option<f64> {
    if !h.is_disc() {
        return None;
    }
    let t0 = f0.domain().1;
    let g0 = h.g.eval(0.0, 0);
    if !(g0 > 0.0) {
        return None;
    }
    let c = t0 / g0;
    if !(c > 0.0 && c <= h.outer * (1.0 + 1e-12)) {
        return None;
    }
    let c = c.min(h.outer);
    let k = 512;
    for i in 0..=k {
        let t = c * i as f64 / k as f64;
        let g = h.g.eval(t, 0);
        let f = h.f.eval(t, 0);
        let target = f0.eval((t0 * t / c).min(t0), 0);
        if (g - g0).abs() > tol || (f - target).abs() > tol {
            return None;
        }
    }
    Some(c)
}

/// Pull back a disc profile along the dilation `x ↦ k x`: the result lives on
/// `[0, T/k]` with `g̃(x) = k g(kx)`, `f̃(x) = f(kx)`.
pub fn pull_back_dilation(h: &WarpingProfile, k: f64) -> WarpingProfile {
    let g = h.g.clone();
    let f = h.f.clone();
    let b = h.outer / k;
    let gg = SmoothFn::new(0.0, b, move |x| Jet::affine(x, 0.0, k).compose(g.jet(k * x)).scale(k));
    let ff = SmoothFn::new(0.0, b, move |x| Jet::affine(x, 0.0, k).compose(f.jet(k * x)));
    let feats = h.features().iter().map(|p| p / k).collect::<Vec<_>>();
    WarpingProfile {
        g: gg.with_features(feats.clone()),
        f: ff.with_features(feats),
        outer: b,
        dim: h.dim,
        kind: ProfileKind::Disc,
        unit_speed: false,
    }
}
