//! Small dense helpers shared by the bound recursion and the tracker.

use nalgebra::{DMatrix, SMatrix};

use crate::error::{Error, Result};

pub fn symmetrize<const D: usize>(m: &SMatrix<f64, D, D>) -> SMatrix<f64, D, D> {
    (m + m.transpose()) * 0.5
}

/// Inverse of a symmetric positive-definite matrix.
///
/// Tries a Cholesky factorization first. If that fails a ridge of
/// `1e-12 * trace / D` is added and the factorization retried once. The
/// output is symmetrized.
pub fn spd_inverse<const D: usize>(m: &SMatrix<f64, D, D>) -> Result<SMatrix<f64, D, D>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::singular("matrix has non-finite entries"));
    }
    let m = symmetrize(m);
    if let Some(ch) = m.cholesky() {
        return Ok(symmetrize(&ch.inverse()));
    }
    let ridge = 1e-12 * m.trace() / D as f64;
    if ridge > 0.0 {
        let reg = m + SMatrix::<f64, D, D>::identity() * ridge;
        if let Some(ch) = reg.cholesky() {
            return Ok(symmetrize(&ch.inverse()));
        }
    }
    Err(Error::singular("matrix is not positive definite after regularization"))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<const D: usize>(m: &SMatrix<f64, D, D>) -> f64 {
    let s = symmetrize(m);
    DMatrix::from_column_slice(D, D, s.as_slice())
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
