use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::par::Exec;

use super::cap::UnitCap;
use super::kprop::{cutoff_function, find_kprop_delta};
use super::{curve_from_curvature, neck_report, CurvatureFunction, GlBend, NeckModel, PlaneCurve};

/// Homotopy from a two-bend curve (`t = 0`) to the r-axis (`t = 1`).
///
/// At time `t` the curvature is cut off after `p = s_4 (1 - t)` over a width
/// `eps`, followed by a straight piece of length `(1 - t)(s_5 - s_4 - eps)`,
/// and a tail: the unit cap curvature scaled by the remaining angle and
/// dilated so that the curve lands on the t-axis.
#[derive(Clone, Debug)]
pub struct Alpha1 {
    base: GlBend,
    pub eps: f64,
    pub delta: f64,
    cap: UnitCap,
}

impl Alpha1 {
    pub fn new(b: &GlBend) -> Result<Alpha1> {
        let [_, s1, _, _, s4, s5] = b.marks;
        let delta = find_kprop_delta(&b.curve, b.second_bend(), s5 - s4)?;
        let eps = delta.min(0.5 * s1.min(s5 - s4));
        Ok(Alpha1 { base: b.clone(), eps, delta, cap: UnitCap::new(&b.options.cap) })
    }

    /// Curvature function of `α₁(t)`.
    pub fn curvature(&self, t: f64) -> Result<CurvatureFunction> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GlError::Domain { t, a: 0.0, b: 1.0 });
        }
        let [_, _, _, _, s4, s5] = self.base.marks;
        let r0 = self.base.curve.r0;
        let eps = self.eps;
        let p = s4 * (1.0 - t);
        let head_end = p + eps;
        let cut = cutoff_function(&self.base.curve.kf, p, eps);
        let head = CurvatureFunction::new(cut.k.clone().on(0.0, head_end));
        let [_, r_head, theta] = curve_from_curvature(&head, r0)?.end();
        let straight = (1.0 - t) * (s5 - s4 - eps);
        let r_start = r_head - straight * theta.cos();
        let ratio = (theta / FRAC_PI_2).clamp(0.0, 1.0);
        let scale = r_start / self.cap.drop(ratio);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GlError::NoSolution(format!("tail cannot reach the axis from height {r_start}")));
        }
        let tail_start = head_end + straight;
        let len = tail_start + scale * self.cap.len();
        let cap = self.cap;
        let head_fn = cut.k.clone();
        let tail = Arc::new(move |s: f64| {
            let j = cap.curvature(((s - tail_start) / scale).clamp(0.0, cap.len()));
            let mut out = [0.0; 5];
            let mut sc = ratio / scale;
            for (i, o) in out.iter_mut().enumerate() {
                *o = j.d(i) * sc;
                sc /= scale;
            }
            Jet(out)
        });
        let mut feats: Vec<f64> = cut.k.features().iter().copied().filter(|&x| x < head_end).collect();
        feats.push(tail_start + scale * cap.round_start());
        Ok(CurvatureFunction::piecewise(
            vec![
                (head_end, Arc::new(move |s| head_fn.jet(s))),
                (tail_start, Arc::new(|_| Jet::ZERO)),
                (len, tail),
            ],
            feats,
        ))
    }

    pub fn curve(&self, t: f64) -> Result<PlaneCurve> {
        curve_from_curvature(&self.curvature(t)?, self.base.curve.r0)
    }
}

/// `α₁(t)` for the curve of `b`, checked against the floor of `m` if it has one.
pub fn alpha1_family(b: &GlBend, m: &NeckModel, t: f64) -> Result<PlaneCurve> {
    let c = Alpha1::new(b)?.curve(t)?;
    if let Some(floor) = m.floor {
        let rep = neck_report(&c, m, Exec::default_for_build())?;
        if !rep.pass {
            return Err(GlError::FloorViolation { min: rep.min_kappa, at: rep.argmin, floor });
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bend::{check_admissible, gl_bend_construct};

    #[test]
    fn endpoints_and_turning() {
        let m = NeckModel::new(3, 0.0).unwrap();
        let g = gl_bend_construct(&m, 1.0, 1e-3).unwrap();
        let a = Alpha1::new(&g).unwrap();
        let c0 = a.curve(0.0).unwrap();
        assert!(c0.distance(&g.curve) < 1e-8, "{}", c0.distance(&g.curve));
        let c1 = a.curve(1.0).unwrap();
        let [t, r, phi] = c1.end();
        assert!(t.abs() < 1e-12 && r.abs() < 1e-9 && phi.abs() < 1e-12);
        assert!((c1.len() - 1.0).abs() < 1e-9);
        for &t in &[0.1, 0.5, 0.77, 0.95] {
            let c = a.curve(t).unwrap();
            let [_, r, phi] = c.end();
            assert!(r.abs() < 1e-8 && phi.abs() < 1e-8, "t={t} r={r} phi={phi}");
            let rep = check_admissible(&c, 2.0);
            assert!(rep.admissible, "t={t} {:?}", rep.violations);
        }
    }
}
