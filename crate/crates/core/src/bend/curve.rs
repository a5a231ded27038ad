use std::sync::Arc;

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::smooth::SmoothFn;

/// Signed curvature `k(s)` of a unit-speed plane curve on `[0, len]`.
#[derive(Clone, Debug)]
pub struct CurvatureFunction {
    pub k: SmoothFn,
    pub len: f64,
}

type Piece = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

impl CurvatureFunction {
    pub fn new(k: SmoothFn) -> CurvatureFunction {
        let (_, b) = k.domain();
        CurvatureFunction { k, len: b }
    }

    pub fn zero(len: f64) -> CurvatureFunction {
        CurvatureFunction::new(SmoothFn::constant(0.0, len, 0.0))
    }

    pub fn constant(c: f64, len: f64) -> CurvatureFunction {
        CurvatureFunction::new(SmoothFn::constant(0.0, len, c))
    }

    /// Curvature given piece by piece: `pieces[i] = (end_i, k_i)`, with `k_i`
    /// used on `[end_{i-1}, end_i]` and evaluated at the global arclength.
    pub fn piecewise(pieces: Vec<(f64, Piece)>, extra_features: Vec<f64>) -> CurvatureFunction {
        let ends: Vec<f64> = pieces.iter().map(|p| p.0).collect();
        let len = *ends.last().expect("at least one piece");
        let funcs: Vec<Piece> = pieces.into_iter().map(|p| p.1).collect();
        let mut feats = ends.clone();
        feats.extend(extra_features);
        let k = SmoothFn::new(0.0, len, move |s| {
            let i = ends.partition_point(|&e| e < s).min(funcs.len() - 1);
            funcs[i](s)
        })
        .with_features(feats);
        CurvatureFunction { k, len }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.k.jet(s).v()
    }

    pub fn jet(&self, s: f64) -> Jet {
        self.k.jet(s)
    }

    /// Breakpoints in `(0, len)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.k.features().iter().copied().filter(|&x| x > 0.0 && x < self.len).collect()
    }
}

/// Unit-speed curve `s ↦ (t(s), r(s))` with tangent `(sin φ, -cos φ)` and `k = φ'`.
#[derive(Clone, Debug)]
pub struct PlaneCurve {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub k: Vec<f64>,
    pub r0: f64,
    pub kf: CurvatureFunction,
}

/// Largest turning per integration step.
const MAX_TURN: f64 = 0.004;

fn rhs(kf: &CurvatureFunction, s: f64, y: [f64; 3]) -> [f64; 3] {
    let (sn, cs) = y[2].sin_cos();
    [sn, -cs, kf.value(s)]
}

/// One RK4 step. The end nodes are nudged inside the step so that a
/// curvature jump at a breakpoint is seen from the correct side.
fn rk4(kf: &CurvatureFunction, s: f64, y: [f64; 3], h: f64) -> [f64; 3] {
    let add = |y: [f64; 3], k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
    let nudge = 1e-9 * h;
    let k1 = rhs(kf, s + nudge, y);
    let k2 = rhs(kf, s + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = rhs(kf, s + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = rhs(kf, s + h - nudge, add(y, k3, h));
    let mut out = y;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Arclength grid: every breakpoint, at least 512 cells per piece, a global
/// spacing of `len / 4096`, and steps short enough to turn by at most
/// `MAX_TURN`.
fn arclength_grid(kf: &CurvatureFunction) -> Vec<f64> {
    let len = kf.len;
    let mut marks = vec![0.0];
    marks.extend(kf.breakpoints());
    marks.push(len);
    marks.dedup();
    let mut grid = vec![0.0];
    for w in marks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let hmax = ((b - a) / 512.0).min(len / 4096.0);
        let mut s = a;
        while s < b {
            let k = kf.value(s).abs();
            let h = if k > 0.0 { hmax.min(MAX_TURN / k) } else { hmax };
            s = if s + 1.5 * h >= b { b } else { s + h };
            grid.push(s);
        }
    }
    grid
}

/// Integrate the Frenet system from `(0, r0)` heading down the r-axis.
pub fn curve_from_curvature(kf: &CurvatureFunction, r0: f64) -> Result<PlaneCurve> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(GlError::InvalidParameter(format!("r0 must be positive, got {r0}")));
    }
    if !(kf.len >= 0.0 && kf.len.is_finite()) {
        return Err(GlError::InvalidParameter(format!("curve length must be nonnegative, got {}", kf.len)));
    }
    let grid = if kf.len > 0.0 { arclength_grid(kf) } else { vec![0.0] };
    let tol = 1e-9 * r0.max(kf.len);
    let n = grid.len();
    let mut c = PlaneCurve {
        s: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
        r: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        k: Vec::with_capacity(n),
        r0,
        kf: kf.clone(),
    };
    let mut y = [0.0, r0, 0.0];
    for (i, &s) in grid.iter().enumerate() {
        if i > 0 {
            let s_prev = grid[i - 1];
            let h = 0.5 * (s - s_prev);
            y = rk4(kf, s_prev, y, h);
            y = rk4(kf, s_prev + h, y, h);
        }
        if !(y[0].is_finite() && y[1].is_finite() && y[2].is_finite()) {
            return Err(GlError::NonFinite(format!("curve state at s = {s}")));
        }
        if y[0] < -tol || (y[1] < -tol && i + 1 < n) {
            return Err(GlError::LeftQuadrant { s });
        }
        c.s.push(s);
        c.t.push(y[0]);
        c.r.push(y[1]);
        c.phi.push(y[2]);
        c.k.push(kf.value(s));
    }
    Ok(c)
}

impl PlaneCurve {
    pub fn len(&self) -> f64 {
        self.kf.len
    }

    pub fn is_empty(&self) -> bool {
        self.s.len() <= 1
    }

    /// `(t, r, φ)` at arclength `s`, integrated from the nearest grid point below.
    pub fn state_at(&self, s: f64) -> [f64; 3] {
        let s = s.clamp(0.0, self.len());
        let i = self.s.partition_point(|&x| x <= s).saturating_sub(1);
        let mut y = [self.t[i], self.r[i], self.phi[i]];
        let d = s - self.s[i];
        if d > 0.0 {
            let cell = self.s.get(i + 1).map_or(d, |&x| x - self.s[i]);
            let steps = ((2.0 * d / cell).ceil() as usize).max(1);
            let h = d / steps as f64;
            for j in 0..steps {
                y = rk4(&self.kf, self.s[i] + j as f64 * h, y, h);
            }
        }
        y
    }

    pub fn end(&self) -> [f64; 3] {
        let i = self.s.len() - 1;
        [self.t[i], self.r[i], self.phi[i]]
    }

    /// Sup distance between the point sets, compared at the grid of `self`.
    pub fn distance(&self, other: &PlaneCurve) -> f64 {
        let mut d = (self.len() - other.len()).abs();
        for i in 0..self.s.len() {
            let [t, r, _] = other.state_at(self.s[i]);
            d = d.max((t - self.t[i]).abs()).max((r - self.r[i]).abs());
        }
        d
    }
}
