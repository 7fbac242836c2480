//! Dense Hermitian eigendecomposition and operator norms via faer.

use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest deviation from Hermitian symmetry, max_ij |m_ij - conj(m_ji)|.
pub fn hermitian_defect(mat: &Mat<c64>) -> f64 {
    let n = mat.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvector columns. Only the lower triangle of `mat` is read.
pub fn hermitian_eigen(mat: &Mat<c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = mat.nrows();
    if n != mat.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "hermitian_eigen needs a square matrix, got {} x {}",
            n,
            mat.ncols()
        )));
    }
    let eig = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Dense(format!("self-adjoint eigensolver failed: {e:?}")))?;
    let values: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
    let mut vectors = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            vectors[(i, j)] = eig.U()[(i, j)];
        }
    }
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(mat: &Mat<c64>) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(mat)?.0)
}

/// Operator (spectral) norm, computed as the square root of the largest
/// eigenvalue of M^* M. This reuses the Hermitian eigensolver rather than a
/// separate SVD path, at the usual cost of squaring the condition number;
/// the norms measured here never sit near the underflow regime where that
/// would matter.
pub fn operator_norm(mat: &Mat<c64>) -> Result<f64> {
    let gram = mat.adjoint() * mat;
    let eigs = hermitian_eigenvalues(&gram)?;
    let top = eigs.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Builds a faer matrix from a row-major closure over num-complex values.
pub fn mat_from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Mat<c64> {
    Mat::from_fn(rows, cols, |i, j| {
        let v = f(i, j);
        c64::new(v.re, v.im)
    })
}
