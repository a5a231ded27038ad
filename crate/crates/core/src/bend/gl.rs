use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::{bump, bump_integral, step_down_at};
use crate::par::Exec;
use crate::quad::{adaptive_simpson, bisect};
use crate::spline::QuinticSpline;
use crate::warped::TorpedoSpec;

use super::cap::UnitCap;
use super::{curve_from_curvature, neck_report, CurvatureFunction, NeckModel, PlaneCurve};

/// Bound on `k r / sin φ` that keeps the neck curvature positive.
pub const ESTIMATE_RATIO: f64 = 9.0 / 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BendOptions {
    /// `r1 / r0`.
    pub r1_frac: f64,
    /// `r2 / r0`.
    pub r2_frac: f64,
    /// Angle reached by the first bend.
    pub phi_star: f64,
    /// Second-bend gain as a fraction of `min(9/16, (k-2)/2)`.
    pub gain_margin: f64,
    /// On-ramp length of the second bend, in units of `r3`.
    pub on_ramp: f64,
    /// Off-ramp length of the second bend, as a fraction of the height at
    /// which the ramp-free law would turn horizontal.
    pub off_ramp: f64,
    /// Length of the horizontal run in units of `r4`.
    pub horizontal: f64,
    pub cap: TorpedoSpec,
}

impl Default for BendOptions {
    fn default() -> Self {
        BendOptions {
            r1_frac: 0.5,
            r2_frac: 0.25,
            phi_star: 0.1f64.asin(),
            gain_margin: 0.9,
            on_ramp: 0.05,
            off_ramp: 0.25,
            horizontal: 2.0,
            cap: TorpedoSpec::default(),
        }
    }
}

impl BendOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.r2_frac
            && self.r2_frac < self.r1_frac
            && self.r1_frac < 1.0
            && 0.0 < self.phi_star
            && self.phi_star < 1.0
            && 0.0 < self.gain_margin
            && self.gain_margin < 1.0
            && self.on_ramp > 0.0
            && self.off_ramp > 0.0
            && self.horizontal > 0.0;
        if !ok {
            return Err(GlError::InvalidParameter(format!("bend options out of range: {self:?}")));
        }
        self.cap.validate()
    }

    /// Gain `c` of the second-bend law `k = c sin φ / r`.
    pub fn gain(&self, codim: usize) -> f64 {
        self.gain_margin * ESTIMATE_RATIO.min((codim as f64 - 2.0) / 2.0)
    }
}

/// Second bend at unit starting height, sampled along its RK4 trajectory.
#[derive(Clone, Debug)]
struct UnitBend {
    spline: Arc<QuinticSpline>,
    len: f64,
    end_height: f64,
    on: f64,
    off_start: f64,
}

struct BendRun {
    phi: f64,
    overshoot: bool,
    s: Vec<f64>,
    k: Vec<f64>,
    r: f64,
}

fn run_unit_bend(gain: f64, phi_star: f64, on: f64, off_start: f64, off_len: f64, record: bool) -> BendRun {
    let law = |s: f64, r: f64, phi: f64| {
        let ramp = (1.0 - step_down_at(s / on)) * step_down_at((s - off_start) / off_len);
        gain * phi.sin() / r * ramp
    };
    let rhs = |s: f64, y: [f64; 3]| [law(s, y[2], y[0]), y[0].sin(), -y[0].cos()];
    let end = off_start + off_len;
    let mut marks = vec![on, off_start, end];
    marks.retain(|&m| m > 0.0 && m <= end);
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // State is (φ, t, r).
    let mut y = [phi_star, 0.0, 1.0];
    let mut s = 0.0;
    let mut out = BendRun { phi: phi_star, overshoot: false, s: Vec::new(), k: Vec::new(), r: 1.0 };
    if record {
        out.s.push(0.0);
        out.k.push(law(0.0, 1.0, phi_star));
    }
    let mut next = 0;
    while s < end {
        while next < marks.len() && marks[next] <= s {
            next += 1;
        }
        let mut h = (0.002 * y[2]).min(5e-4);
        if s < on {
            h = h.min(on / 128.0);
        }
        if s + h > off_start {
            h = h.min(off_len / 128.0);
        }
        if next < marks.len() && s + 1.5 * h >= marks[next] {
            h = marks[next] - s;
        }
        let add = |y: [f64; 3], k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
        let k1 = rhs(s, y);
        let k2 = rhs(s + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = rhs(s + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = rhs(s + h, add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        s += h;
        if y[0] > FRAC_PI_2 + 1e-12 || y[2] <= 0.0 || !y[0].is_finite() {
            out.overshoot = true;
            out.phi = y[0];
            return out;
        }
        if record {
            out.s.push(s);
            out.k.push(law(s, y[2], y[0]));
        }
    }
    out.phi = y[0];
    out.r = y[2];
    out
}

fn unit_bend(gain: f64, opts: &BendOptions) -> Result<UnitBend> {
    let on = opts.on_ramp;
    let off_len = opts.off_ramp * opts.phi_star.sin().powf(1.0 / gain);
    let miss = |off_start: f64| {
        let run = run_unit_bend(gain, opts.phi_star, on, off_start, off_len, false);
        if run.overshoot {
            1.0
        } else {
            run.phi - FRAC_PI_2
        }
    };
    let off_start = bisect(&miss, 0.0, 4.0, 1e-15)?;
    let run = run_unit_bend(gain, opts.phi_star, on, off_start, off_len, true);
    if run.overshoot || (run.phi - FRAC_PI_2).abs() > 1e-9 {
        return Err(GlError::NoSolution(format!("second bend shooting missed by {}", run.phi - FRAC_PI_2)));
    }
    let spline = QuinticSpline::new(&run.s, &run.k)?;
    Ok(UnitBend { spline: Arc::new(spline), len: off_start + off_len, end_height: run.r, on, off_start })
}

/// Output of [`gl_bend_construct`].
#[derive(Clone, Debug)]
pub struct GlBend {
    pub curve: PlaneCurve,
    /// Arclengths `s_0 = 0, ..., s_5` of the bend points.
    pub marks: [f64; 6],
    /// Bend points `(t_i, r_i)`.
    pub points: [(f64, f64); 6],
    /// Radius of the horizontal run and of the end cap.
    pub r4: f64,
    pub gain: f64,
    pub model: NeckModel,
    pub options: BendOptions,
}

impl GlBend {
    /// Arclength interval `[s_3, s_4]` of the second bend.
    pub fn second_bend(&self) -> (f64, f64) {
        (self.marks[3], self.marks[4])
    }
}

/// Curve that bends from the r-axis to the horizontal line `r = target_r4`
/// in two bends and closes with a torpedo cap of radius `target_r4`.
pub fn gl_bend_construct(m: &NeckModel, r0: f64, target_r4: f64) -> Result<GlBend> {
    gl_bend_construct_with(m, r0, target_r4, &BendOptions::default())
}

pub fn gl_bend_construct_with(m: &NeckModel, r0: f64, target_r4: f64, opts: &BendOptions) -> Result<GlBend> {
    opts.validate()?;
    if m.codim < 3 {
        return Err(GlError::Dimension { need: "codimension >= 3", got: m.codim });
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(GlError::InvalidParameter(format!("r0 must be positive, got {r0}")));
    }
    let r1 = opts.r1_frac * r0;
    let r2 = opts.r2_frac * r0;
    if !(target_r4 > 0.0 && target_r4 < r2) {
        return Err(GlError::InvalidParameter(format!("target r4 = {target_r4} must lie in (0, r2 = {r2})")));
    }
    let gain = opts.gain(m.codim);
    let unit = unit_bend(gain, opts)?;
    // The second bend is scale invariant, so its start height is fixed by the target.
    let r3 = target_r4 / unit.end_height;
    if r3 > r2 {
        return Err(GlError::NoSolution(format!(
            "second bend from r2 = {r2} only reaches r4 = {}, above the target {target_r4}",
            r2 * unit.end_height
        )));
    }
    let cyl = (m.codim - 1) as f64 * (m.codim - 2) as f64 / (target_r4 * target_r4);
    if let Some(b) = m.floor {
        if m.kappa_n + cyl <= b {
            return Err(GlError::NoSolution(format!(
                "horizontal run curvature {} does not exceed the floor {b}",
                m.kappa_n + cyl
            )));
        }
    }

    let phi_star = opts.phi_star;
    let cos_int = adaptive_simpson(&|x| (phi_star * bump_integral(x)).cos(), 0.0, 1.0, 1e-15);
    let b1 = (r1 - r2) / cos_int;
    let s1 = r0 - r1;
    let s2 = s1 + b1;
    let s3 = s2 + (r2 - r3) / phi_star.cos();
    let s4 = s3 + r3 * unit.len;
    let eps = target_r4;
    let s5 = s4 + opts.horizontal * eps;
    let cap = UnitCap::new(&opts.cap);
    let len = s5 + eps * cap.len();

    let zero: Arc<dyn Fn(f64) -> Jet + Send + Sync> = Arc::new(|_| Jet::ZERO);
    let first = Arc::new(move |s: f64| bump(Jet::affine(s, -s1 / b1, 1.0 / b1)).scale(phi_star / b1));
    let spl = unit.spline.clone();
    let ulen = unit.len;
    let second = Arc::new(move |s: f64| {
        let x = ((s - s3) / r3).clamp(0.0, ulen);
        let j = spl.jet(x);
        let mut out = [0.0; 5];
        let mut sc = 1.0 / r3;
        for (i, o) in out.iter_mut().enumerate() {
            *o = j.d(i) * sc;
            sc /= r3;
        }
        Jet(out)
    });
    let end_cap = Arc::new(move |s: f64| {
        let j = cap.curvature(((s - s5) / eps).clamp(0.0, cap.len()));
        let mut out = [0.0; 5];
        let mut sc = 1.0 / eps;
        for (i, o) in out.iter_mut().enumerate() {
            *o = j.d(i) * sc;
            sc /= eps;
        }
        Jet(out)
    });
    let kf = CurvatureFunction::piecewise(
        vec![(s1, zero.clone()), (s2, first), (s3, zero.clone()), (s4, second), (s5, zero), (len, end_cap)],
        vec![s3 + r3 * unit.on, s3 + r3 * unit.off_start, s5 + eps * cap.round_start()],
    );
    let curve = curve_from_curvature(&kf, r0)?;
    let marks = [0.0, s1, s2, s3, s4, s5];
    let mut points = [(0.0, 0.0); 6];
    for (p, &s) in points.iter_mut().zip(&marks) {
        let [t, r, _] = curve.state_at(s);
        *p = (t, r);
    }
    let out = GlBend { curve, marks, points, r4: target_r4, gain, model: *m, options: *opts };
    if let Some(b) = m.floor {
        let rep = neck_report(&out.curve, m, Exec::default_for_build())?;
        if !rep.pass {
            return Err(GlError::FloorViolation { min: rep.min_kappa, at: rep.argmin, floor: b });
        }
    }
    Ok(out)
}

/// Largest value of `k - (9/16) sin φ / r` over grid points in `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub worst: f64,
    pub at: f64,
    pub holds: bool,
}

pub fn curvature_estimate(c: &PlaneCurve, a: f64, b: f64) -> EstimateReport {
    let mut worst = f64::NEG_INFINITY;
    let mut at = f64::NAN;
    for i in 0..c.s.len() {
        let s = c.s[i];
        if s < a || s > b || c.r[i] <= 0.0 {
            continue;
        }
        let excess = c.k[i] - ESTIMATE_RATIO * c.phi[i].sin() / c.r[i];
        if excess > worst {
            worst = excess;
            at = s;
        }
    }
    EstimateReport { worst, at, holds: worst <= 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bend::{check_admissible, neck_scalar_curvature_model};

    #[test]
    fn unit_bend_turns_to_horizontal() {
        let opts = BendOptions::default();
        let u = unit_bend(opts.gain(3), &opts).unwrap();
        // Without ramps the law reaches the horizontal at height sin(φ*)^(1/c).
        let bare = opts.phi_star.sin().powf(1.0 / opts.gain(3));
        assert!(u.end_height < bare && u.end_height > 0.2 * bare, "{} vs {bare}", u.end_height);
    }

    #[test]
    fn codim_three_bend() {
        let m = NeckModel::new(3, 0.0).unwrap();
        let g = gl_bend_construct(&m, 1.0, 1e-3).unwrap();
        let c = &g.curve;
        let [_, r, phi] = c.end();
        assert!(r.abs() < 1e-8 && phi.abs() < 1e-8, "end r={r} phi={phi}");
        let (s3, s4) = g.second_bend();
        let est = curvature_estimate(c, s3, s4);
        assert!(est.holds, "{est:?}");
        assert!((g.points[4].1 - 1e-3).abs() < 1e-9);
        let rep = check_admissible(c, 2.0);
        assert!(rep.admissible, "{:?}", rep.violations);
        // Cap region, bending towards the axis.
        let kc = neck_scalar_curvature_model(c, &m, g.marks[5] + 0.5e-3).unwrap();
        assert!(kc > 0.0);
    }

    #[test]
    fn negative_base_curvature_on_the_run() {
        let m = NeckModel::new(5, -1.0).unwrap();
        let g = gl_bend_construct(&m, 40.0, 0.05).unwrap();
        let (s4, s5) = (g.marks[4], g.marks[5]);
        for i in 0..g.curve.s.len() {
            let s = g.curve.s[i];
            if s > s4 && s < s5 {
                let k = neck_scalar_curvature_model(&g.curve, &m, s).unwrap();
                assert!(k > 4700.0, "s={s} k={k}");
            }
        }
    }

    #[test]
    fn infeasible_target() {
        let m = NeckModel::new(3, 0.0).unwrap();
        assert!(matches!(gl_bend_construct(&m, 1.0, 0.3), Err(GlError::InvalidParameter(_))));
        assert!(matches!(gl_bend_construct(&m, 1.0, 0.01), Err(GlError::NoSolution(_))));
    }
}
