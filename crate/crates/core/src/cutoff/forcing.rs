use std::sync::Arc;

use crate::jet::Jet;
use crate::mollifier::{bump, bump_moments, plateau, plateau_moments, step_down};
use crate::quad::CumulativeTable;

/// Profile of a rescaled shape part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Bump,
    Plateau,
}

impl Shape {
    fn jet(self, x: Jet) -> Jet {
        match self {
            Shape::Bump => bump(x),
            Shape::Plateau => plateau(x),
        }
    }

    fn moments(self, x: f64) -> (f64, f64) {
        match self {
            Shape::Bump => bump_moments(x),
            Shape::Plateau => plateau_moments(x),
        }
    }
}

#[derive(Clone, Debug)]
enum Part {
    /// `h S((t - a) / w)` on `[a, a + w)`.
    Shape { shape: Shape, h: f64, a: f64, w: f64 },
    /// `c / t` on `[lo, hi)`.
    Recip { c: f64, lo: f64, hi: f64 },
    /// `(c / t) m(x^μ)` on `[lo, hi)` with `x = (t - lo) / (hi - lo)` and
    /// `m` the flat step down, or `1 - m` when rising.
    Ramp { ramp: RampSpec, table: Arc<CumulativeTable> },
}

#[derive(Clone, Copy, Debug)]
struct RampSpec {
    c: f64,
    lo: f64,
    hi: f64,
    mu: f64,
    rising: bool,
}

impl RampSpec {
    fn jet(&self, t: f64) -> Jet {
        let x = Jet::affine(t, -self.lo / (self.hi - self.lo), 1.0 / (self.hi - self.lo));
        let m = if x.v() <= 0.0 { Jet::constant(1.0) } else { step_down(x.powf(self.mu)) };
        let m = if self.rising { Jet::constant(1.0) - m } else { m };
        let inv = Jet::var(t).recip().scale(self.c);
        m * inv
    }
}

impl Part {
    fn span(&self) -> (f64, f64) {
        match *self {
            Part::Shape { a, w, .. } => (a, a + w),
            Part::Recip { lo, hi, .. } => (lo, hi),
            Part::Ramp { ramp, .. } => (ramp.lo, ramp.hi),
        }
    }

    fn jet(&self, t: f64) -> Jet {
        let (lo, hi) = self.span();
        if t < lo || t >= hi {
            return Jet::ZERO;
        }
        match self {
            Part::Shape { shape, h, a, w } => shape.jet(Jet::affine(t, -a / w, 1.0 / w)).scale(*h),
            Part::Recip { c, .. } => Jet::var(t).recip().scale(*c),
            Part::Ramp { ramp, .. } => ramp.jet(t),
        }
    }

    fn moments(&self, t: f64) -> (f64, f64) {
        let (lo, hi) = self.span();
        if t <= lo {
            return (0.0, 0.0);
        }
        match self {
            Part::Shape { shape, h, a, w } => {
                let (i0, i1) = shape.moments((t - a) / w);
                (h * w * i0, h * w * (a * i0 + w * i1))
            }
            Part::Recip { c, .. } => {
                let u = t.min(hi);
                (c * (u / lo).ln(), c * (u - lo))
            }
            Part::Ramp { ramp, table } => table.eval(&|s| ramp.jet(s).v(), t.min(hi)),
        }
    }
}

/// Piecewise right-hand side `φ` of `ψ'' = λ φ`, with exact jets and exact
/// or tabulated first and second moments.
#[derive(Clone, Debug, Default)]
pub struct Forcing {
    parts: Vec<Part>,
}

impl Forcing {
    pub fn new() -> Forcing {
        Forcing::default()
    }

    pub fn shape(mut self, shape: Shape, h: f64, a: f64, w: f64) -> Forcing {
        self.parts.push(Part::Shape { shape, h, a, w });
        self
    }

    pub fn recip(mut self, c: f64, lo: f64, hi: f64) -> Forcing {
        self.parts.push(Part::Recip { c, lo, hi });
        self
    }

    pub fn ramp(mut self, c: f64, lo: f64, hi: f64, mu: f64, rising: bool) -> Forcing {
        let ramp = RampSpec { c, lo, hi, mu, rising };
        let table = CumulativeTable::build(&|s| ramp.jet(s).v(), &[(lo, hi)], 1e-15);
        self.parts.push(Part::Ramp { ramp, table: Arc::new(table) });
        self
    }

    /// `φ` with four derivatives. Parts are half-open, so a join is counted once.
    pub fn jet(&self, t: f64) -> Jet {
        self.parts.iter().fold(Jet::ZERO, |acc, p| acc + p.jet(t))
    }

    /// `(∫_0^t φ, ∫_0^t s φ(s) ds)`.
    pub fn moments(&self, t: f64) -> (f64, f64) {
        self.parts.iter().fold((0.0, 0.0), |acc, p| {
            let (a, b) = p.moments(t);
            (acc.0 + a, acc.1 + b)
        })
    }

    /// Jet of `ψ(t) = t + λ ∫_0^t ∫_0^τ φ`.
    pub fn psi_jet(&self, t: f64, lambda: f64) -> Jet {
        let (m0, m1) = self.moments(t);
        let f = self.jet(t);
        Jet([t + lambda * (t * m0 - m1), 1.0 + lambda * m0, lambda * f.d(0), lambda * f.d(1), lambda * f.d(2)])
    }

    /// Endpoints of every part.
    pub fn features(&self) -> Vec<f64> {
        let mut f: Vec<f64> = self.parts.iter().flat_map(|p| {
            let (a, b) = p.span();
            [a, b]
        }).collect();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        f.dedup();
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_simpson;

    fn brute(f: &Forcing, t: f64) -> (f64, f64) {
        let mut cuts = vec![0.0];
        cuts.extend(f.features().into_iter().filter(|&x| x > 0.0 && x < t));
        cuts.push(t);
        let mut out = (0.0, 0.0);
        for w in cuts.windows(2) {
            out.0 += adaptive_simpson(&|s| f.jet(s).v(), w[0], w[1], 1e-15);
            out.1 += adaptive_simpson(&|s| s * f.jet(s).v(), w[0], w[1], 1e-15);
        }
        out
    }

    #[test]
    fn moments_match_quadrature() {
        let f = Forcing::new()
            .shape(Shape::Bump, -2.0, 0.01, 0.02)
            .shape(Shape::Plateau, 0.7, 0.1, 0.05)
            .ramp(0.5, 0.2, 0.3, 1.7, true)
            .recip(0.5, 0.3, 0.4)
            .ramp(0.5, 0.4, 0.6, 0.6, false);
        for &t in &[0.015, 0.03, 0.12, 0.2, 0.25, 0.3, 0.35, 0.5, 0.7] {
            let (a, b) = f.moments(t);
            let (x, y) = brute(&f, t);
            assert!((a - x).abs() < 1e-11 && (b - y).abs() < 1e-11, "t={t}: {a} {x} / {b} {y}");
        }
    }

    #[test]
    fn psi_derivatives_are_consistent() {
        let f = Forcing::new().shape(Shape::Bump, 3.0, 0.1, 0.2).ramp(1.0, 0.4, 0.6, 1.3, true);
        let lam = 0.6;
        let h = 1e-5;
        for &t in &[0.15, 0.22, 0.45, 0.55] {
            let j = f.psi_jet(t, lam);
            for k in 0..4 {
                let fd = (f.psi_jet(t + h, lam).d(k) - f.psi_jet(t - h, lam).d(k)) / (2.0 * h);
                assert!((fd - j.d(k + 1)).abs() < 1e-6 * (1.0 + fd.abs()), "t={t} k={k}: {fd} vs {}", j.d(k + 1));
            }
        }
    }
}
