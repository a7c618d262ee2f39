//! Smoothed hinge loss.
//!
//! The plain hinge `max(0, 1 - y*h)` is non-smooth, so the solvers use its
//! Nesterov smoothing with parameter `sigma`, scaled per sample by the
//! max-abs norm `x_inf` of the sample's concatenated features:
//!
//! ```text
//! g(y*h) = max_{v in [0,1]}  v * (1 - y*h) - (sigma/2) * x_inf * v^2
//! ```
//!
//! The inner maximizer has the closed form `clamp(gap / (sigma * x_inf))`
//! with `gap = 1 - y*h`, which yields the piecewise evaluation
//!
//! ```text
//!         0                          if y*h > 1
//! g  =    gap - sigma * x_inf / 2    if y*h < 1 - sigma * x_inf
//!         gap^2 / (2 sigma x_inf)    otherwise
//! ```
//!
//! `g` is convex, continuously differentiable, and sandwiched between the
//! hinge and the hinge minus `sigma * x_inf / 2`.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::data::MultiModalDataset;
use crate::error::{Error, Result};
use crate::model::Model;

/// Optimal dual variable of the smoothing: `clamp(gap / (sigma * x_inf))`
/// to `[0, 1]`, where `gap = 1 - y*h`.
///
/// This value is also `-d g / d(y*h)`, which is why every solver gradient
/// is built from it.
pub fn dual_weight(gap: f64, x_inf: f64, sigma: f64) -> f64 {
    debug_assert!(x_inf > 0.0 && sigma > 0.0);
    (gap / (sigma * x_inf)).clamp(0.0, 1.0)
}

/// Smoothed hinge loss at decision margin `margin = y*h`.
pub fn smoothed_hinge(margin: f64, x_inf: f64, sigma: f64) -> f64 {
    debug_assert!(x_inf > 0.0 && sigma > 0.0);
    let gap = 1.0 - margin;
    let sx = sigma * x_inf;
    if margin > 1.0 {
        0.0
    } else if margin < 1.0 - sx {
        gap - sx / 2.0
    } else {
        gap * gap / (2.0 * sx)
    }
}

/// Per-sample smoothing context shared by the sub-problem solvers.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingContext<'a> {
    sigma: f64,
    x_inf: ArrayView1<'a, f64>,
}

impl<'a> SmoothingContext<'a> {
    pub fn new(sigma: f64, x_inf: ArrayView1<'a, f64>) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Value(format!(
                "smoothing parameter must be positive, got {}",
                sigma
            )));
        }
        if let Some(n) = x_inf.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Value(format!(
                "sample {} has non-positive max-abs norm {}",
                n, x_inf[n]
            )));
        }
        Ok(Self { sigma, x_inf })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn x_inf(&self) -> ArrayView1<'a, f64> {
        self.x_inf
    }

    /// Total smoothed loss over a `P x N` matrix of decision values against
    /// `N x P` labels.
    pub fn loss_sum(&self, decisions: ArrayView2<f64>, labels: ArrayView2<f64>) -> f64 {
        let mut total = 0.0;
        for (p, row) in decisions.rows().into_iter().enumerate() {
            for (n, &h) in row.iter().enumerate() {
                total += smoothed_hinge(labels[(n, p)] * h, self.x_inf[n], self.sigma);
            }
        }
        total
    }

    /// `y * dual_weight` for every (task, sample) pair, as a `P x N` matrix.
    /// The loss gradient with respect to the decision value `h_pn` is the
    /// negation of entry `(p, n)`.
    pub fn weighted_duals(&self, decisions: ArrayView2<f64>, labels: ArrayView2<f64>) -> Array2<f64> {
        let (tasks, samples) = decisions.dim();
        let mut out = Array2::zeros((tasks, samples));
        for p in 0..tasks {
            for n in 0..samples {
                let y = labels[(n, p)];
                let gap = 1.0 - y * decisions[(p, n)];
                out[(p, n)] = y * dual_weight(gap, self.x_inf[n], self.sigma);
            }
        }
        out
    }
}

/// Total smoothed loss of a model over a dataset (the data-fit part of the
/// training objective).
pub fn total_loss(model: &Model, data: &MultiModalDataset, sigma: f64) -> f64 {
    let scores = model.scores(data);
    let x_inf = data.sample_inf_norms();
    let mut total = 0.0;
    for (n, row) in scores.rows().into_iter().enumerate() {
        for (p, &s) in row.iter().enumerate() {
            total += smoothed_hinge(data.labels()[(n, p)] * s, x_inf[n], sigma);
        }
    }
    total
}
