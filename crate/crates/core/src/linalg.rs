//! Small dense linear-algebra helpers shared across modules.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Relative rank cutoff used when forming pseudo-inverses.
pub(crate) const RANK_CUTOFF: f64 = 1e-10;

/// Minimum-norm least-squares solution of `a x ~ b` via SVD.
///
/// Singular values below `1e-12 * sigma_max` are treated as zero, so a
/// rank-deficient system yields the minimum-norm solution rather than an
/// error.
pub(crate) fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let eps = if sigma_max > 0.0 {
        1e-12 * sigma_max
    } else {
        f64::MIN_POSITIVE
    };
    svd.solve(b, eps)
        .expect("SVD factors requested at construction")
}

/// Eigenvalues of a symmetric matrix, ascending.
pub(crate) fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    ev
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m)[0]
}

/// Enforces exact symmetry before an eigendecomposition of a matrix that is
/// symmetric up to roundoff.
pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Checks that `m` is square, symmetric, and PSD up to a relative tolerance.
pub(crate) fn is_symmetric_psd(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())).max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 * scale {
                return false;
            }
        }
    }
    min_eigenvalue(&symmetrize(m)) >= -1e-9 * scale
}

/// Outer product `x xᵀ`.
pub(crate) fn outer(x: &DVector<f64>) -> DMatrix<f64> {
    x * x.transpose()
}
