use serde::{Deserialize, Serialize};

use crate::error::{GlError, Result};
use crate::par::{self, Exec};
use crate::warped::CurvatureReport;

use super::PlaneCurve;

/// Product model `N × D^k` with a flat normal disc and `N` of constant
/// scalar curvature `kappa_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeckModel {
    pub codim: usize,
    pub kappa_n: f64,
    /// Floor the neck curvature must stay above, if any.
    pub floor: Option<f64>,
}

impl NeckModel {
    pub fn new(codim: usize, kappa_n: f64) -> Result<NeckModel> {
        if codim < 3 {
            return Err(GlError::Dimension { need: "codimension >= 3", got: codim });
        }
        Ok(NeckModel { codim, kappa_n, floor: None })
    }

    pub fn with_floor(mut self, b: f64) -> NeckModel {
        self.floor = Some(b);
        self
    }

    /// Scalar curvature of `ds^2 + r^2 dξ^2_{k-1} + g_N` where the curve has
    /// angle `phi` and curvature `k` at height `r`.
    pub fn kappa(&self, r: f64, phi: f64, k: f64) -> f64 {
        let m = self.codim as f64;
        let sp = phi.sin();
        self.kappa_n + (m - 1.0) * (m - 2.0) * sp * sp / (r * r) - 2.0 * (m - 1.0) * k * sp / r
    }

    /// Value on a round end of curvature `k` where `r → 0` and `sin φ / r → -k`.
    pub fn kappa_at_pole(&self, k: f64) -> f64 {
        let m = self.codim as f64;
        self.kappa_n + m * (m - 1.0) * k * k
    }
}

/// Below this fraction of `r0` the pole limit replaces the quotient formula.
const POLE_FRACTION: f64 = 1e-7;

/// Neck scalar curvature at arclength `s`.
pub fn neck_scalar_curvature_model(c: &PlaneCurve, m: &NeckModel, s: f64) -> Result<f64> {
    let [_, r, phi] = c.state_at(s);
    let k = c.kf.value(s);
    neck_value(c, m, s, r, phi, k)
}

fn neck_value(c: &PlaneCurve, m: &NeckModel, s: f64, r: f64, phi: f64, k: f64) -> Result<f64> {
    if r <= POLE_FRACTION * c.r0 {
        let at_end = (c.len() - s).abs() <= 1e-6 * c.r0.max(c.len());
        if at_end && k <= 0.0 {
            return Ok(m.kappa_at_pole(k));
        }
        return Err(GlError::NonPositive { t: s, f: r });
    }
    Ok(m.kappa(r, phi, k))
}

/// Neck curvature at every grid point of the curve.
pub fn neck_report(c: &PlaneCurve, m: &NeckModel, exec: Exec) -> Result<CurvatureReport> {
    let idx: Vec<usize> = (0..c.s.len()).collect();
    let vals = par::map(exec, &idx, |&i| neck_value(c, m, c.s[i], c.r[i], c.phi[i], c.k[i]));
    let kappa: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(CurvatureReport::from_samples(c.s.clone(), kappa, m.floor.unwrap_or(0.0)))
}
