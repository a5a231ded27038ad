use nalgebra::DMatrix;

use crate::error::{GlError, Result};

/// A symmetric positive definite bilinear form in a fixed basis.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProduct {
    matrix: DMatrix<f64>,
}

impl InnerProduct {
    pub fn new(matrix: DMatrix<f64>) -> Result<InnerProduct> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(GlError::NotSpd(format!("need a nonempty square matrix, got {}x{}", n, matrix.ncols())));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(GlError::NotSpd("non-finite entry".into()));
        }
        let scale = matrix.amax();
        for i in 0..n {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(GlError::NotSpd(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        // Leading minors positive.
        for k in 1..=n {
            let det = matrix.view((0, 0), (k, k)).clone_owned().determinant();
            if !(det > 0.0) {
                return Err(GlError::NotSpd(format!("leading minor {k} is {det}")));
            }
        }
        if matrix.clone().cholesky().is_none() {
            return Err(GlError::NotSpd("Cholesky factorization failed".into()));
        }
        Ok(InnerProduct { matrix })
    }

    pub fn identity(dim: usize) -> InnerProduct {
        InnerProduct { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| u[i] * self.matrix[(i, j)] * v[j]).sum::<f64>()).sum()
    }
}

/// The `g₂`-symmetric positive `B` with `g₁(u, v) = g₂(Bu, Bv)`.
///
/// With `G₂ = L Lᵀ`, `B = L⁻ᵀ S Lᵀ` where `S` is the symmetric square root of
/// `L⁻¹ G₁ L⁻ᵀ`, taken from its eigendecomposition.
pub fn spd_sqrt(g1: &InnerProduct, g2: &InnerProduct) -> Result<DMatrix<f64>> {
    if g1.dim() != g2.dim() {
        return Err(GlError::InvalidParameter(format!("dimensions differ: {} and {}", g1.dim(), g2.dim())));
    }
    let l = g2.matrix.clone().cholesky().ok_or_else(|| GlError::NotSpd("g2".into()))?.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| GlError::NotSpd("g2 factor is singular".into()))?;
    let m = &l_inv * &g1.matrix * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&x| !(x > 0.0)) {
        return Err(GlError::NotSpd("g1 is not positive definite".into()));
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    let s = &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose();
    Ok(l_inv.transpose() * s * l.transpose())
}
