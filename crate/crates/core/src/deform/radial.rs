use crate::error::Result;
use crate::jet::Jet;
use crate::mollifier::{bump, bump_integral, plateau, plateau_moments};
use crate::smooth::SmoothFn;
use crate::warped::WarpingProfile;

use super::ProfileChain;

/// Start and end, as fractions of `T₀`, of the blend in [`DiscMap`].
const BLEND: (f64, f64) = (0.5, 0.9);
/// Slope of [`DiscMap`] near the centre once the chain is long enough.
const CENTRE_SLOPE: f64 = 2.0;

/// Radial map `ρ_L: [0, T₀] → [0, L]` for `L >= T₀`.
///
/// `ρ = k r (1 - S) + (r + L - T₀) S` with `S` a flat blend over
/// `[T₀/2, 0.9 T₀]`, so `ρ` is linear with slope `k` on `[0, T₀/2]` and a
/// translation on `[0.9 T₀, T₀]`. `k` grows linearly from 1 at `L = T₀` to 2
/// at `L = 1.9 T₀` and stays there; this keeps `ρ' > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscMap {
    pub t0: f64,
    pub len: f64,
    pub k: f64,
}

impl DiscMap {
    pub fn new(t0: f64, len: f64) -> DiscMap {
        let l_min = t0 + (CENTRE_SLOPE - 1.0) * BLEND.1 * t0;
        let k = 1.0 + (CENTRE_SLOPE - 1.0) * ((len - t0) / (l_min - t0)).clamp(0.0, 1.0);
        DiscMap { t0, len, k }
    }

    fn blend(&self, r: f64) -> Jet {
        let (a, b) = BLEND;
        let dx = 1.0 / (self.t0 * (b - a));
        let x = Jet::affine(r, -a / (b - a), dx);
        if x.v() <= 0.0 {
            return Jet::ZERO;
        }
        if x.v() >= 1.0 {
            return Jet::constant(1.0);
        }
        let bj = bump(x);
        Jet([bump_integral(x.v()), dx * bj.d(0), dx * bj.d(1), dx * bj.d(2), dx * bj.d(3)])
    }

    pub fn jet(&self, r: f64) -> Jet {
        let s = self.blend(r);
        let id = Jet::var(r);
        id.scale(self.k) * (Jet::constant(1.0) - s) + id.add_const(self.len - self.t0) * s
    }
}

/// Map from an annulus of length `L` onto a chain of length `ℓ`: the
/// identity on `[0, δ]`, a translation by `ℓ - L` on `[L - δ, L]`, with the
/// difference spread along a plateau in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusMap {
    pub len: f64,
    pub chain_len: f64,
    pub delta: f64,
}

impl AnnulusMap {
    pub fn jet(&self, y: f64) -> Jet {
        let span = self.len - 2.0 * self.delta;
        let dz = 1.0 / span;
        let z = Jet::affine(y, -self.delta / span, dz);
        let total = plateau_moments(1.0).0;
        let pj = plateau(z);
        let m = Jet([plateau_moments(z.v()).0, dz * pj.d(0), dz * pj.d(1), dz * pj.d(2), dz * pj.d(3)]);
        Jet::var(y) + m.scale((self.chain_len - self.len) / total)
    }

    /// Smallest `ρ'`; positive exactly when the map is a diffeomorphism.
    pub fn min_slope(&self) -> f64 {
        let total = plateau_moments(1.0).0;
        1.0 + ((self.chain_len - self.len) / (total * (self.len - 2.0 * self.delta))).min(0.0)
    }
}

fn pulled_back(u: &SmoothFn, rho: impl Fn(f64) -> Jet + Send + Sync + Clone + 'static, a: f64, b: f64, feats: Vec<f64>) -> (SmoothFn, SmoothFn) {
    let (lo, hi) = u.domain();
    let r1 = rho.clone();
    let g = SmoothFn::new(a, b, move |x| r1(x).derivative()).with_features(feats.clone());
    let u = u.clone();
    let f = SmoothFn::new(a, b, move |x| {
        let j = rho(x);
        j.compose(u.jet(j.v().clamp(lo, hi)))
    })
    .with_features(feats);
    (g, f)
}

/// The disc metric `ρ*(dt² + u² dξ²)` on `[0, T₀]`.
pub fn disc_pullback(chain: &ProfileChain, t0: f64, dim: usize) -> Result<WarpingProfile> {
    let map = DiscMap::new(t0, chain.len());
    let u = chain.to_smooth();
    let feats = vec![BLEND.0 * t0, BLEND.1 * t0];
    let (g, f) = pulled_back(&u, move |r| map.jet(r), 0.0, t0, feats);
    WarpingProfile::disc(g, f, dim)
}

/// The annulus metric `ρ*(dt² + u² dξ²)` on `[inner, inner + len]`.
pub fn annulus_pullback(chain: &ProfileChain, inner: f64, len: f64, delta: f64, dim: usize) -> Result<WarpingProfile> {
    let map = AnnulusMap { len, chain_len: chain.len(), delta };
    let u = chain.to_smooth();
    let span = len - 2.0 * delta;
    let e = crate::mollifier::PLATEAU_EDGE;
    let feats = [0.0, e, 1.0 - e, 1.0].iter().map(|z| inner + delta + z * span).collect();
    let (g, f) = pulled_back(&u, move |y| map.jet(y - inner), inner, inner + len, feats);
    WarpingProfile::annulus(g, f, dim)
}
