use serde::{Deserialize, Serialize};

use crate::error::{GlError, Result};
use crate::par::{self, Exec};

use super::WarpingProfile;

/// How verification grids are built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPolicy {
    pub uniform: usize,
    /// Points inserted between the neighbours of each local minimiser.
    pub refine: usize,
    /// Maximum number of local minimisers refined.
    pub max_minima: usize,
    /// Points per decade of the geometric grid towards the inner end.
    pub per_decade: usize,
    pub exec: Exec,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy { uniform: 2048, refine: 64, max_minima: 16, per_decade: 16, exec: Exec::default_for_build() }
    }
}

impl GridPolicy {
    pub fn with_uniform(uniform: usize) -> GridPolicy {
        GridPolicy { uniform, ..GridPolicy::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CurvatureReport {
    pub grid: Vec<f64>,
    pub kappa: Vec<f64>,
    pub min_kappa: f64,
    pub argmin: f64,
    pub floor: f64,
    pub pass: bool,
}

impl CurvatureReport {
    pub fn from_samples(grid: Vec<f64>, kappa: Vec<f64>, floor: f64) -> CurvatureReport {
        let i = par::argmin(&kappa).unwrap_or(0);
        let min_kappa = kappa.get(i).copied().unwrap_or(f64::NAN);
        let argmin = grid.get(i).copied().unwrap_or(f64::NAN);
        let pass = min_kappa > floor && kappa.iter().all(|k| k.is_finite());
        CurvatureReport { grid, kappa, min_kappa, argmin, floor, pass }
    }
}

/// Uniform grid on `[a, b]`, plus clusters around each feature point and a
/// geometric grid towards `a` reaching below the smallest feature scale.
pub fn verification_grid(a: f64, b: f64, uniform: usize, per_decade: usize, features: &[f64]) -> Vec<f64> {
    let mut pts = Vec::with_capacity(uniform + 64 * features.len() + 512);
    let m = uniform.max(2);
    for i in 0..m {
        pts.push(a + (b - a) * i as f64 / (m - 1) as f64);
    }
    let len = b - a;
    let mut smallest = len * 1e-4;
    for &p in features {
        let d = p - a;
        if d > 0.0 {
            smallest = smallest.min(d);
            for k in 0..=32 {
                pts.push(a + d * (0.5 + k as f64 / 32.0));
            }
        }
        pts.push(p);
    }
    // Geometric coverage between the smallest scale and the full length.
    let lo = smallest * 1e-2;
    if lo > 0.0 && per_decade > 0 {
        let decades = (len / lo).log10();
        let count = (decades * per_decade as f64).ceil() as usize;
        for i in 0..=count {
            pts.push(a + lo * (len / lo).powf(i as f64 / count as f64));
        }
    }
    // Endpoint refinement.
    let h = len / (m - 1) as f64;
    for k in 1..32 {
        pts.push(a + h * k as f64 / 32.0);
        pts.push(b - h * k as f64 / 32.0);
    }
    pts.retain(|x| *x >= a && *x <= b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    pts
}

fn kappa_on(h: &WarpingProfile, grid: &[f64], exec: Exec) -> Result<Vec<f64>> {
    let vals = par::map(exec, grid, |&t| h.kappa(t));
    vals.into_iter().collect()
}

/// Minimum scalar curvature over the verification grid with the default policy.
pub fn min_scalar_curvature(h: &WarpingProfile, grid_size: usize, floor: f64) -> Result<CurvatureReport> {
    min_scalar_curvature_with(h, floor, GridPolicy::with_uniform(grid_size))
}

pub fn min_scalar_curvature_with(h: &WarpingProfile, floor: f64, policy: GridPolicy) -> Result<CurvatureReport> {
    let (a, b) = h.domain();
    if !(b > a) {
        return Err(GlError::InvalidParameter("empty profile domain".into()));
    }
    let grid = verification_grid(a, b, policy.uniform, policy.per_decade, &h.features());
    let kappa = kappa_on(h, &grid, policy.exec)?;
    // Local minimisers, smallest first.
    let mut minima: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let l = if i > 0 { kappa[i - 1] } else { f64::INFINITY };
            let r = if i + 1 < grid.len() { kappa[i + 1] } else { f64::INFINITY };
            kappa[i] <= l && kappa[i] <= r
        })
        .collect();
    minima.sort_by(|&i, &j| kappa[i].partial_cmp(&kappa[j]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    minima.truncate(policy.max_minima);
    let mut extra = Vec::new();
    for &i in &minima {
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        for k in 1..policy.refine {
            extra.push(lo + (hi - lo) * k as f64 / policy.refine as f64);
        }
    }
    extra.retain(|x| *x > a && *x < b);
    let extra_k = kappa_on(h, &extra, policy.exec)?;
    let mut all: Vec<(f64, f64)> = grid.into_iter().zip(kappa).chain(extra.into_iter().zip(extra_k)).collect();
    all.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    all.dedup_by(|x, y| x.0 == y.0);
    let (grid, kappa): (Vec<f64>, Vec<f64>) = all.into_iter().unzip();
    Ok(CurvatureReport::from_samples(grid, kappa, floor))
}
