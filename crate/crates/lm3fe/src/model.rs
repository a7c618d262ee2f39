//! The fitted model and the solver configuration.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::data::MultiModalDataset;
use crate::error::{Error, Result};

/// Joint extraction / prediction model.
///
/// * one `d_v x m` extraction matrix per modality,
/// * an `m x P` prediction matrix (one column per task) with a separate
///   unregularized bias per task,
/// * a non-negative weight per modality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Model {
    pub extraction: Vec<Array2<f64>>,
    pub prediction: Array2<f64>,
    pub bias: Array1<f64>,
    pub modality_weights: Array1<f64>,
}

impl Model {
    /// Latent dimension `m` shared by all extraction matrices.
    pub fn latent_dim(&self) -> usize {
        self.prediction.nrows()
    }

    pub fn n_tasks(&self) -> usize {
        self.prediction.ncols()
    }

    pub fn n_modalities(&self) -> usize {
        self.extraction.len()
    }

    /// Check that the model's shapes are mutually consistent and match the
    /// dataset, and that every modality weight is non-negative.
    pub fn validate_against(&self, data: &MultiModalDataset) -> Result<()> {
        if self.extraction.len() != data.n_modalities() {
            return Err(Error::Shape(format!(
                "model has {} extraction matrices, dataset has {} modalities",
                self.extraction.len(),
                data.n_modalities()
            )));
        }
        let m = self.latent_dim();
        for (v, (u, d_v)) in self
            .extraction
            .iter()
            .zip(data.modality_dims())
            .enumerate()
        {
            if u.nrows() != d_v || u.ncols() != m {
                return Err(Error::Shape(format!(
                    "extraction matrix {} is {}x{}, expected {}x{}",
                    v,
                    u.nrows(),
                    u.ncols(),
                    d_v,
                    m
                )));
            }
        }
        if self.bias.len() != self.n_tasks() {
            return Err(Error::Shape(format!(
                "bias has {} entries, expected one per task ({})",
                self.bias.len(),
                self.n_tasks()
            )));
        }
        if self.prediction.ncols() != data.n_tasks() {
            return Err(Error::Shape(format!(
                "prediction matrix has {} columns, dataset has {} tasks",
                self.prediction.ncols(),
                data.n_tasks()
            )));
        }
        if self.modality_weights.len() != data.n_modalities() {
            return Err(Error::Shape(format!(
                "model has {} modality weights, dataset has {} modalities",
                self.modality_weights.len(),
                data.n_modalities()
            )));
        }
        if self.modality_weights.iter().any(|&t| t < 0.0 || !t.is_finite()) {
            return Err(Error::Value("modality weights must be non-negative".into()));
        }
        Ok(())
    }

    /// Weighted latent representation of every sample: the `m x N` matrix
    /// whose column `n` is `sum_v theta_v * U_v' * x_n_v`.
    pub fn latent(&self, data: &MultiModalDataset) -> Array2<f64> {
        let m = self.latent_dim();
        let mut latent = Array2::zeros((m, data.n_samples()));
        for (v, u) in self.extraction.iter().enumerate() {
            let theta_v = self.modality_weights[v];
            if theta_v == 0.0 {
                continue;
            }
            latent.scaled_add(theta_v, &u.t().dot(&data.modality(v)));
        }
        latent
    }

    /// Decision values for every sample and task as an `N x P` matrix:
    /// entry `(n, p)` is `w_p' * latent_n + b_p`.
    pub fn scores(&self, data: &MultiModalDataset) -> Array2<f64> {
        let latent = self.latent(data);
        let mut scores = latent.t().dot(&self.prediction);
        scores += &self.bias;
        scores
    }
}

/// Hyperparameters and budgets for [`crate::driver::fit`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Ridge weight on the prediction matrix (biases excluded).
    pub gamma_a: f64,
    /// l2,1 weight on the extraction matrices.
    pub gamma_b: f64,
    /// Ridge weight on the modality weights.
    pub gamma_c: f64,
    /// Smoothing parameter of the hinge loss.
    pub sigma: f64,
    /// Relative-improvement stopping threshold, shared by the outer loop
    /// and the inner solvers.
    pub epsilon: f64,
    /// Latent dimension; defaults to the number of tasks when `None`.
    pub latent_dim: Option<usize>,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    /// Row-norm floor when inverting row norms for the l2,1 reweighting.
    pub d_floor: f64,
    pub rng_seed: u64,
}

impl SolverConfig {
    pub fn new(gamma_a: f64, gamma_b: f64, gamma_c: f64) -> Self {
        Self {
            gamma_a,
            gamma_b,
            gamma_c,
            sigma: 5.0,
            epsilon: 1e-3,
            latent_dim: None,
            max_outer_iters: 50,
            max_inner_iters: 500,
            d_floor: 1e-12,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("gamma_c", self.gamma_c),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Value(format!("{} must be positive, got {}", name, v)));
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Value(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Value(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if self.latent_dim == Some(0) {
            return Err(Error::Value("latent_dim must be at least 1".into()));
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::Value("iteration budgets must be at least 1".into()));
        }
        if !(self.d_floor > 0.0) {
            return Err(Error::Value(format!(
                "d_floor must be positive, got {}",
                self.d_floor
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn tiny_data() -> MultiModalDataset {
        MultiModalDataset::new(
            vec![array![[1.0, 0.5]], array![[0.2, 0.4], [0.6, 0.8]]],
            array![[1.0], [-1.0]],
        )
        .unwrap()
    }

    fn matching_model() -> Model {
        Model {
            extraction: vec![array![[1.0]], array![[0.0], [2.0]]],
            prediction: array![[1.0]],
            bias: array![0.5],
            modality_weights: array![1.0, 0.5],
        }
    }

    #[test]
    fn latent_weighs_and_sums_modalities() {
        let data = tiny_data();
        let model = matching_model();
        model.validate_against(&data).unwrap();
        // latent_n = 1.0 * x_n_1 + 0.5 * (row 2 of modality 2 scaled by 2)
        let latent = model.latent(&data);
        assert_eq!(latent, array![[1.0 + 0.6, 0.5 + 0.8]]);
    }

    #[test]
    fn scores_add_bias_per_task() {
        let data = tiny_data();
        let model = matching_model();
        let scores = model.scores(&data);
        assert_eq!(scores, array![[2.1], [1.8]]);
    }

    #[test]
    fn zero_weight_modality_does_not_contribute() {
        let data = tiny_data();
        let mut model = matching_model();
        model.modality_weights = array![1.0, 0.0];
        assert_eq!(model.latent(&data), array![[1.0, 0.5]]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let data = tiny_data();
        let mut model = matching_model();
        model.extraction[1] = Array2::zeros((3, 1));
        assert!(model.validate_against(&data).is_err());
    }

    #[test]
    fn negative_modality_weight_is_rejected() {
        let data = tiny_data();
        let mut model = matching_model();
        model.modality_weights = array![1.0, -0.1];
        assert!(model.validate_against(&data).is_err());
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        assert!(SolverConfig::new(0.1, 0.1, 0.1).validate().is_ok());
        assert!(SolverConfig::new(0.0, 0.1, 0.1).validate().is_err());
        let mut c = SolverConfig::new(0.1, 0.1, 0.1);
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
        c = SolverConfig::new(0.1, 0.1, 0.1);
        c.sigma = -1.0;
        assert!(c.validate().is_err());
        c = SolverConfig::new(0.1, 0.1, 0.1);
        c.latent_dim = Some(0);
        assert!(c.validate().is_err());
    }
}
