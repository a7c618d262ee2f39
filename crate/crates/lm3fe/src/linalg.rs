//! Small dense-matrix helpers used throughout the crate.

use ndarray::{Array1, ArrayView2};

/// Euclidean norm of each row.
pub fn row_norms(m: ArrayView2<f64>) -> Array1<f64> {
    m.rows()
        .into_iter()
        .map(|r| r.dot(&r).sqrt())
        .collect::<Vec<_>>()
        .into()
}

/// l2,1 norm: the sum of the row-wise Euclidean norms.
pub fn l21_norm(m: ArrayView2<f64>) -> f64 {
    m.rows().into_iter().map(|r| r.dot(&r).sqrt()).sum()
}

/// Squared Frobenius norm.
pub fn frobenius_sq(m: ArrayView2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum()
}
