//! Default hyper-parameter grids for model selection.

/// Candidate weights for the row-norm penalty: powers of ten from 1e-9
/// through 1e1.
pub fn gamma_b_grid() -> Vec<f64> {
    (-9..=1).map(|k| 10f64.powi(k)).collect()
}

/// Candidate weights for the two ridge terms: powers of ten from 1e-5
/// through 1e5.
pub fn gamma_ac_grid() -> Vec<f64> {
    (-5..=5).map(|k| 10f64.powi(k)).collect()
}

/// Candidate keep fractions for feature selection: tenths from 0.1
/// through 1.0.
pub fn fraction_grid() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}
