//! Smooth real functions on a closed interval, evaluated as 4-jets.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::jet::Jet;
use crate::spline::QuinticSpline;

type JetFn = dyn Fn(f64) -> Jet + Send + Sync;

/// A smooth function on `[a, b]` that can report derivatives up to order 4.
///
/// `features` lists points where the function has fine structure (bump
/// edges, collar scales); verification grids cluster points around them.
#[derive(Clone)]
pub struct SmoothFn {
    f: Arc<JetFn>,
    a: f64,
    b: f64,
    features: Arc<[f64]>,
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("SmoothFn").field("domain", &(self.a, self.b)).field("features", &self.features.len()).finish()
    }
}

impl SmoothFn {
    pub fn new(a: f64, b: f64, f: impl Fn(f64) -> Jet + Send + Sync + 'static) -> SmoothFn {
        SmoothFn { f: Arc::new(f), a, b, features: Arc::from(Vec::new()) }
    }

    pub fn constant(a: f64, b: f64, c: f64) -> SmoothFn {
        SmoothFn::new(a, b, move |_| Jet::constant(c))
    }

    /// Quintic spline through samples.
    pub fn sampled(xs: &[f64], ys: &[f64]) -> Result<SmoothFn> {
        let s = QuinticSpline::new(xs, ys)?;
        let (a, b) = s.domain();
        Ok(SmoothFn::new(a, b, move |t| s.jet(t)))
    }

    /// Polynomial with the given coefficients (lowest order first).
    pub fn polynomial(a: f64, b: f64, coeffs: Vec<f64>) -> SmoothFn {
        SmoothFn::new(a, b, move |t| {
            let x = Jet::var(t);
            let mut acc = Jet::ZERO;
            for &c in coeffs.iter().rev() {
                acc = acc * x + c;
            }
            acc
        })
    }

    pub fn with_features(mut self, mut feats: Vec<f64>) -> SmoothFn {
        feats.retain(|x| x.is_finite() && *x >= self.a && *x <= self.b);
        feats.sort_by(|x, y| x.partial_cmp(y).unwrap());
        feats.dedup();
        self.features = Arc::from(feats);
        self
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    #[inline]
    pub fn jet(&self, t: f64) -> Jet {
        (self.f)(t)
    }

    /// Derivative of order `order` (0..=4) at `t`.
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        self.jet(t).d(order)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a - 1e-12 * (1.0 + self.a.abs()) && t <= self.b + 1e-12 * (1.0 + self.b.abs())
    }

    /// `self ∘ inner`, on the domain of `inner`.
    pub fn compose(&self, inner: &SmoothFn) -> SmoothFn {
        let o = self.f.clone();
        let i = inner.f.clone();
        SmoothFn::new(inner.a, inner.b, move |t| {
            let ji = i(t);
            ji.compose(o(ji.v()))
        })
        .with_features(inner.features.to_vec())
    }

    /// Restrict or relabel the domain without changing the formula.
    pub fn on(mut self, a: f64, b: f64) -> SmoothFn {
        self.a = a;
        self.b = b;
        let feats = self.features.to_vec();
        self.with_features(feats)
    }

    pub fn scaled(&self, c: f64) -> SmoothFn {
        let f = self.f.clone();
        SmoothFn::new(self.a, self.b, move |t| f(t).scale(c)).with_features(self.features.to_vec())
    }

    /// `t ↦ self(t / c)` on `[c a, c b]`.
    pub fn dilated(&self, c: f64) -> SmoothFn {
        let f = self.f.clone();
        let feats = self.features.iter().map(|x| x * c).collect();
        SmoothFn::new(c * self.a, c * self.b, move |t| {
            let inner = Jet::affine(t, 0.0, 1.0 / c);
            inner.compose(f(t / c))
        })
        .with_features(feats)
    }

    /// `t ↦ c self(t / c)`: the homothetic rescaling of a profile.
    pub fn homothety(&self, c: f64) -> SmoothFn {
        self.dilated(c).scaled(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_chain_rule() {
        let sin = SmoothFn::new(0.0, 10.0, |t| Jet::var(t).sin());
        let sq = SmoothFn::polynomial(0.0, 3.0, vec![0.0, 0.0, 1.0]);
        let h = sin.compose(&sq);
        let t = 1.3f64;
        assert!((h.eval(t, 1) - 2.0 * t * (t * t).cos()).abs() < 1e-14);
    }

    #[test]
    fn homothety_scales_derivatives() {
        let sin = SmoothFn::new(0.0, 10.0, |t| Jet::var(t).sin());
        let h = sin.homothety(0.5);
        let t = 0.3f64;
        assert!((h.eval(t, 0) - 0.5 * (2.0 * t).sin()).abs() < 1e-15);
        assert!((h.eval(t, 2) + 2.0 * (2.0 * t).sin()).abs() < 1e-14);
    }
}
