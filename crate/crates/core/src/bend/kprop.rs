use crate::error::{GlError, Result};
use crate::jet::Jet;
use crate::mollifier::step_down;
use crate::par::{self, Exec};
use crate::smooth::SmoothFn;

use super::{curvature_estimate, curve_from_curvature, CurvatureFunction, PlaneCurve, ESTIMATE_RATIO};

/// Points sampled in the shift variable `u ∈ [0, δ]`.
const SHIFT_SAMPLES: usize = 65;

/// Largest `δ = upper 2^-j` with `k(s + u) < (9/16) sin φ(s) / r(s)` for all
/// grid points `s` in `bend` and all `u ∈ [0, δ]`.
pub fn find_kprop_delta(c: &PlaneCurve, bend: (f64, f64), upper: f64) -> Result<f64> {
    let (a, b) = bend;
    if !(upper > 0.0) {
        return Err(GlError::InvalidParameter(format!("upper search bound must be positive, got {upper}")));
    }
    let idx: Vec<usize> = (0..c.s.len()).filter(|&i| c.s[i] >= a && c.s[i] <= b && c.r[i] > 0.0).collect();
    if idx.is_empty() {
        return Err(GlError::InvalidParameter(format!("no grid points in [{a}, {b}]")));
    }
    let bound: Vec<f64> = idx.iter().map(|&i| ESTIMATE_RATIO * c.phi[i].sin() / c.r[i]).collect();
    for (j, &i) in idx.iter().enumerate() {
        if c.k[i] - bound[j] >= 0.0 {
            return Err(GlError::Precondition(format!(
                "curvature {} reaches the bound {} at s = {}",
                c.k[i], bound[j], c.s[i]
            )));
        }
    }
    let len = c.len();
    let pos: Vec<usize> = (0..idx.len()).collect();
    for j in 0..=60 {
        let delta = upper * 0.5f64.powi(j);
        let worst = par::map(Exec::default_for_build(), &pos, |&p| {
            let s = c.s[idx[p]];
            let mut w = f64::NEG_INFINITY;
            for q in 0..SHIFT_SAMPLES {
                let u = delta * q as f64 / (SHIFT_SAMPLES - 1) as f64;
                w = w.max(c.kf.value((s + u).min(len)) - bound[p]);
            }
            w
        });
        if worst.iter().all(|&w| w < 0.0) {
            return Ok(delta);
        }
    }
    Err(GlError::NoSolution("no admissible cutoff width down to 2^-60".into()))
}

/// `k̃(s) = m((s - s0) / δ) k(s)`, with `m` the flat step from 1 to 0.
pub fn cutoff_function(kf: &CurvatureFunction, s0: f64, delta: f64) -> CurvatureFunction {
    let k = kf.k.clone();
    let mut feats = kf.k.features().to_vec();
    feats.extend([s0, s0 + delta]);
    let f = SmoothFn::new(0.0, kf.len, move |s| step_down(Jet::affine(s, -s0 / delta, 1.0 / delta)) * k.jet(s))
        .with_features(feats);
    CurvatureFunction::new(f)
}

/// Cut the curvature off after `s0` and check the positivity estimate on
/// `bend` for the reintegrated curve.
///
/// The curvature is returned on `[0, bend.1]`. The curve is reintegrated up
/// to `s0 + delta` only: past that point `k̃ = 0` and the estimate holds
/// trivially, while the straight continuation may leave the quadrant.
pub fn cutoff_curvature(c: &PlaneCurve, s0: f64, delta: f64, bend: (f64, f64)) -> Result<(CurvatureFunction, PlaneCurve)> {
    if !(delta > 0.0) {
        return Err(GlError::InvalidParameter(format!("cutoff width must be positive, got {delta}")));
    }
    let cut = cutoff_function(&c.kf, s0, delta);
    let kf = CurvatureFunction::new(cut.k.clone().on(0.0, bend.1));
    let end = (s0 + delta).clamp(0.0, bend.1);
    let curve = curve_from_curvature(&CurvatureFunction::new(cut.k.on(0.0, end)), c.r0)?;
    let est = curvature_estimate(&curve, bend.0, bend.1);
    if !est.holds {
        return Err(GlError::Precondition(format!(
            "cut-off curvature exceeds the bound by {} at s = {}; the width is too large",
            est.worst, est.at
        )));
    }
    Ok((kf, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bend::{gl_bend_construct, NeckModel};

    #[test]
    fn zero_curvature_gives_the_upper_bound() {
        let c = curve_from_curvature(&CurvatureFunction::new(SmoothFn::constant(0.0, 1.0, 0.0)), 2.0).unwrap();
        // φ = 0 here, so the bound is 0 and the strict precondition fails.
        assert!(matches!(find_kprop_delta(&c, (0.2, 0.8), 0.5), Err(GlError::Precondition(_))));
        let tilted = CurvatureFunction::piecewise(
            vec![(0.1, std::sync::Arc::new(|_| Jet::constant(5.0))), (1.0, std::sync::Arc::new(|_| Jet::ZERO))],
            vec![],
        );
        let c = curve_from_curvature(&tilted, 2.0).unwrap();
        assert_eq!(find_kprop_delta(&c, (0.3, 0.8), 0.5).unwrap(), 0.5);
    }

    #[test]
    fn gl_curve_cutoffs() {
        let m = NeckModel::new(3, 0.0).unwrap();
        let g = gl_bend_construct(&m, 1.0, 1e-3).unwrap();
        let bend = g.second_bend();
        let upper = g.marks[5] - g.marks[4];
        let d = find_kprop_delta(&g.curve, bend, upper).unwrap();
        assert!(d > 0.0 && d <= upper);
        let (kf, _) = cutoff_curvature(&g.curve, bend.1, d, bend).unwrap();
        for &s in &[0.1, bend.0, 0.5 * (bend.0 + bend.1), bend.1] {
            assert_eq!(kf.value(s), g.curve.kf.value(s));
        }
        let (kf, _) = cutoff_curvature(&g.curve, bend.0, d, bend).unwrap();
        assert_eq!(kf.value(bend.0 + d), 0.0);
        assert_eq!(kf.value(0.5 * (bend.0 + d + bend.1)), 0.0);
        let mid = 0.5 * (bend.0 + bend.1);
        assert!(cutoff_curvature(&g.curve, mid, d, bend).is_ok());
    }
}
