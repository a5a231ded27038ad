use std::sync::Arc;

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::smooth::SmoothFn;
use crate::warped::{min_scalar_curvature_with, CurvatureReport, GridPolicy, ProfileKind, WarpingProfile};

#[derive(Clone, Debug)]
struct Piece {
    offset: f64,
    len: f64,
    /// Local coordinate of the piece's start; `f` lives on `[a, a + len]`.
    a: f64,
    f: SmoothFn,
}

/// Unit-speed warping function assembled from pieces laid end to end.
///
/// Each piece keeps its own coordinate, so structure far below the
/// resolution of the global arclength (a collar of size `1e-40` sitting at
/// arclength 5) stays exact when the pieces are verified one by one.
#[derive(Clone, Debug, Default)]
pub struct ProfileChain {
    pieces: Vec<Piece>,
    len: f64,
}

impl ProfileChain {
    pub fn new() -> ProfileChain {
        ProfileChain::default()
    }

    /// Append `f` restricted to `[a, b]`; empty ranges are skipped.
    pub fn push(mut self, f: &SmoothFn, a: f64, b: f64) -> ProfileChain {
        if b > a {
            self.pieces.push(Piece { offset: self.len, len: b - a, a, f: f.clone() });
            self.len += b - a;
        }
        self
    }

    pub fn constant(self, r: f64, len: f64) -> ProfileChain {
        self.push(&SmoothFn::constant(0.0, len.max(0.0), r), 0.0, len)
    }

    pub fn append(mut self, other: ProfileChain) -> ProfileChain {
        for p in other.pieces {
            self = self.push(&p.f, p.a, p.a + p.len);
        }
        self
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// The chain cut at global arclength `x`.
    pub fn split_at(&self, x: f64) -> (ProfileChain, ProfileChain) {
        let (mut left, mut right) = (ProfileChain::new(), ProfileChain::new());
        for p in &self.pieces {
            let cut = (x - p.offset).clamp(0.0, p.len);
            left = left.push(&p.f, p.a, p.a + cut);
            right = right.push(&p.f, p.a + cut, p.a + p.len);
        }
        (left, right)
    }

    /// Piecewise `s ↦ ν ((1 - θ) f(a + s/k) + θ r)` with `k = ν·stretch`:
    /// the metric `ν²(stretch² dx² + f_θ(x)² dξ²)` in unit speed.
    pub fn rescaled(&self, nu: f64, stretch: f64, theta: f64, r: f64) -> ProfileChain {
        let k = nu * stretch;
        let mut out = ProfileChain::new();
        for p in &self.pieces {
            let (f, a) = (p.f.clone(), p.a);
            let g = SmoothFn::new(0.0, k * p.len, move |s| {
                let x = Jet::affine(s, a, 1.0 / k);
                x.compose(f.jet(x.v())).scale(nu * (1.0 - theta)).add_const(nu * theta * r)
            })
            .with_features(p.f.features().iter().map(|y| k * (y - a)).collect());
            out = out.push(&g, 0.0, k * p.len);
        }
        out
    }

    /// Global start of every piece after the first.
    pub fn joins(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.offset).collect()
    }

    /// The assembled function of global arclength on `[start, start + len]`.
    pub fn to_smooth_at(&self, start: f64) -> SmoothFn {
        let pieces: Arc<[Piece]> = Arc::from(self.pieces.clone());
        let mut feats = Vec::new();
        for p in pieces.iter() {
            feats.push(start + p.offset);
            feats.extend(p.f.features().iter().filter(|&&x| x >= p.a && x <= p.a + p.len).map(|x| start + p.offset + (x - p.a)));
        }
        feats.push(start + self.len);
        let ps = pieces.clone();
        SmoothFn::new(start, start + self.len, move |t| {
            let s = t - start;
            let i = ps.partition_point(|p| p.offset <= s).saturating_sub(1);
            let p = &ps[i];
            let local = (p.a + (s - p.offset)).clamp(p.a, p.a + p.len);
            p.f.jet(local)
        })
        .with_features(feats)
    }

    pub fn to_smooth(&self) -> SmoothFn {
        self.to_smooth_at(0.0)
    }

    /// Unit-speed disc profile of the chain.
    pub fn to_profile(&self, dim: usize) -> Result<WarpingProfile> {
        WarpingProfile::unit_disc(self.to_smooth(), dim)
    }

    /// Minimum curvature over all pieces, each checked in its own
    /// coordinate; grid points are reported in global arclength.
    pub fn verify(&self, dim: usize, floor: f64, policy: GridPolicy) -> Result<CurvatureReport> {
        if self.pieces.is_empty() {
            return Err(GlError::InvalidParameter("empty profile chain".into()));
        }
        let mut grid = Vec::new();
        let mut kappa = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let f = p.f.clone().on(p.a, p.a + p.len);
            let h = if i == 0 && p.a == 0.0 && p.f.eval(0.0, 0) == 0.0 {
                WarpingProfile::unit_disc(f, dim)?
            } else {
                WarpingProfile {
                    g: SmoothFn::constant(p.a, p.a + p.len, 1.0),
                    f,
                    outer: p.a + p.len,
                    dim,
                    kind: ProfileKind::Annulus { inner: p.a },
                    unit_speed: true,
                }
            };
            let rep = min_scalar_curvature_with(&h, floor, policy)?;
            grid.extend(rep.grid.iter().map(|x| p.offset + (x - p.a)));
            kappa.extend(rep.kappa);
        }
        Ok(CurvatureReport::from_samples(grid, kappa, floor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pieces_join_in_order() {
        let sin = SmoothFn::new(0.0, 10.0, |t| Jet::var(t).sin());
        let c = ProfileChain::new().push(&sin, 0.0, 1.0).constant(2.0, 0.5).push(&sin, 3.0, 4.0).constant(1.0, 0.0);
        assert_eq!(c.piece_count(), 3);
        assert!((c.len() - 2.5).abs() < 1e-15);
        let f = c.to_smooth();
        assert!((f.eval(0.5, 0) - 0.5f64.sin()).abs() < 1e-15);
        assert_eq!(f.eval(1.2, 0), 2.0);
        assert!((f.eval(2.0, 0) - 3.5f64.sin()).abs() < 1e-14);
        assert_eq!(c.joins(), vec![1.0, 1.5]);
    }

    #[test]
    fn tiny_structure_is_verified_locally() {
        // A cylinder of radius 1e-30 far from the origin: its curvature
        // 2/r² is seen exactly even though 1e-30 is far below the spacing
        // of the global coordinate there.
        let r = 1e-30;
        let c = ProfileChain::new().constant(1.0, 3.0).constant(r, 1e-29);
        let rep = c.verify(3, 0.0, GridPolicy::with_uniform(64)).unwrap();
        assert!((rep.kappa.iter().cloned().fold(0.0, f64::max) - 2.0 / (r * r)).abs() < 1e-6 * 2.0 / (r * r));
        assert!((rep.min_kappa - 2.0).abs() < 1e-12);
    }
}
