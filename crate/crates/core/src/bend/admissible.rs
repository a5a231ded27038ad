use serde::{Deserialize, Serialize};

use super::PlaneCurve;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Which of the four conditions failed.
    pub item: u8,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub violations: Vec<Violation>,
}

impl AdmissibilityReport {
    pub fn failed(&self, item: u8) -> bool {
        self.violations.iter().any(|v| v.item == item)
    }
}

/// Relative tolerance for positions, angles and scaled curvature derivatives.
pub const ADMISSIBLE_TOL: f64 = 1e-6;

/// Check the four admissibility conditions:
///
/// 1. the curve leaves `(0, r0)` downwards and continues the r-axis smoothly
///    (curvature and its first two derivatives vanish at `s = 0`);
/// 2. it ends on the t-axis, perpendicular to it, along a circular arc
///    (curvature derivatives vanish at the end);
/// 3. `r < r0` for every `s > 0`, so the level `r0` is crossed once;
/// 4. `r0` is below the injectivity radius bound.
pub fn check_admissible(c: &PlaneCurve, injectivity_radius_bound: f64) -> AdmissibilityReport {
    let tol = ADMISSIBLE_TOL;
    let r0 = c.r0;
    let mut violations = Vec::new();
    let mut push = |item: u8, detail: String| violations.push(Violation { item, detail });

    if c.t[0].abs() > tol * r0 || (c.r[0] - r0).abs() > tol * r0 || c.phi[0].abs() > tol {
        push(1, format!("starts at ({}, {}) with angle {}", c.t[0], c.r[0], c.phi[0]));
    }
    let k0 = c.kf.jet(0.0);
    for j in 0..3 {
        let scaled = k0.d(j).abs() * r0.powi(j as i32 + 1);
        if scaled > tol {
            push(1, format!("curvature derivative of order {j} is {} at the start", k0.d(j)));
        }
    }

    let [_, r_end, phi_end] = c.end();
    if r_end.abs() > tol * r0 {
        push(2, format!("ends at height {r_end}"));
    }
    if phi_end.abs() > tol {
        push(2, format!("meets the t-axis at angle {phi_end} from the normal"));
    }
    let kl = c.kf.jet(c.len());
    for j in 1..3 {
        let scaled = kl.d(j).abs() * r0.powi(j as i32 + 1);
        if scaled > tol {
            push(2, format!("curvature derivative of order {j} is {} at the end", kl.d(j)));
        }
    }

    // Within `2 tol r0` of the start a unit-speed descent is still inside the band.
    let above: Vec<f64> = c.s.iter().zip(&c.r).skip(1).filter(|(&s, &r)| s > 2.0 * tol * r0 && r >= r0 * (1.0 - tol)).map(|(&s, _)| s).collect();
    if let Some(&s) = above.first() {
        push(3, format!("returns to height r0 at s = {s}"));
    }

    if r0 >= injectivity_radius_bound {
        push(4, format!("r0 = {r0} is not below the bound {injectivity_radius_bound}"));
    }

    AdmissibilityReport { admissible: violations.is_empty(), violations }
}
