//! Sub-solver for one modality's extraction matrix.
//!
//! With the classifiers, the modality weights, and every other modality
//! frozen, the extraction matrix `U` of modality `v` minimizes
//!
//! ```text
//! F(U) = sum_{p,n} g(y_pn * (theta_v * w_p' U' x_n + c_pn)) + gamma_b * |U|_{2,1}
//! ```
//!
//! where `c_pn` collects the frozen contributions (other modalities plus
//! the bias). The row-wise `l2,1` penalty is handled by iterative
//! reweighting: each sweep majorizes `|U|_{2,1}` by a quadratic with the
//! diagonal weights `1 / (2 max(|u^i|, floor))`, takes an accelerated
//! gradient step on the majorizer, then refreshes the weights. Because
//! accelerated iterates can overshoot, each step is screened against the
//! true objective: the combined step, the plain gradient step, and the
//! current iterate compete, and the best of the three is kept, so the
//! reported objective sequence is non-increasing by construction.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::data::MultiModalDataset;
use crate::error::{Error, Result};
use crate::hinge::SmoothingContext;
use crate::linalg::{l21_norm, row_norms};
use crate::model::{Model, SolverConfig};
use crate::solver::{improvement_stalled, SubsolverRun};

/// Majorizer weights for the row-norm penalty: `1 / (2 max(|u^i|, floor))`
/// per row. The floor keeps rows that have collapsed to zero from
/// producing infinite weights.
pub fn reweight_diag(u: ArrayView2<f64>, floor: f64) -> Array1<f64> {
    row_norms(u).mapv(|r| 1.0 / (2.0 * r.max(floor)))
}

/// One modality's sub-problem with everything else frozen.
#[derive(Debug)]
pub struct ExtractionSubproblem<'a> {
    features: ArrayView2<'a, f64>, // d_v x N
    labels: ArrayView2<'a, f64>,   // N x P
    prediction: ArrayView2<'a, f64>, // m x P, bias excluded
    offsets: Array2<f64>,          // P x N frozen decision contributions
    theta: f64,
    gamma_b: f64,
    ctx: SmoothingContext<'a>,
}

impl<'a> ExtractionSubproblem<'a> {
    /// Assemble the sub-problem for modality `v`, computing the frozen
    /// offsets from the remaining modalities and the bias.
    pub fn build(
        data: &'a MultiModalDataset,
        model: &'a Model,
        v: usize,
        gamma_b: f64,
        sigma: f64,
    ) -> Result<Self> {
        model.validate_against(data)?;
        if v >= data.n_modalities() {
            return Err(Error::Value(format!(
                "modality index {} out of range ({} modalities)",
                v,
                data.n_modalities()
            )));
        }
        let mut rest = Array2::zeros((model.latent_dim(), data.n_samples()));
        for u_idx in 0..data.n_modalities() {
            if u_idx == v || model.modality_weights[u_idx] == 0.0 {
                continue;
            }
            rest.scaled_add(
                model.modality_weights[u_idx],
                &model.extraction[u_idx].t().dot(&data.modality(u_idx)),
            );
        }
        let mut offsets = model.prediction.t().dot(&rest); // P x N
        for mut row in offsets.axis_iter_mut(Axis(1)) {
            row += &model.bias;
        }
        Self::from_parts(
            data.modality(v),
            data.labels(),
            model.prediction.view(),
            offsets,
            model.modality_weights[v],
            gamma_b,
            sigma,
            data.sample_inf_norms().view(),
        )
    }

    /// Assemble from raw parts. `offsets[(p, n)]` must hold the decision
    /// contribution of everything outside this modality.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        features: ArrayView2<'a, f64>,
        labels: ArrayView2<'a, f64>,
        prediction: ArrayView2<'a, f64>,
        offsets: Array2<f64>,
        theta: f64,
        gamma_b: f64,
        sigma: f64,
        x_inf: ArrayView1<'a, f64>,
    ) -> Result<Self> {
        let (n, p) = (labels.nrows(), labels.ncols());
        if features.ncols() != n || offsets.dim() != (p, n) || prediction.ncols() != p {
            return Err(Error::Shape(format!(
                "inconsistent modality sub-problem: features {}x{}, labels {}x{}, offsets {:?}, prediction {}x{}",
                features.nrows(),
                features.ncols(),
                n,
                p,
                offsets.dim(),
                prediction.nrows(),
                prediction.ncols()
            )));
        }
        let ctx = SmoothingContext::new(sigma, x_inf)?;
        Ok(Self {
            features,
            labels,
            prediction,
            offsets,
            theta,
            gamma_b,
            ctx,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.features.nrows(), self.prediction.nrows())
    }

    /// Decision values `theta_v * W'(U'x_n) + c_pn` for all tasks and
    /// samples, as a `P x N` matrix.
    pub fn decisions(&self, u: ArrayView2<f64>) -> Array2<f64> {
        let latent = u.t().dot(&self.features); // m x N
        let mut d = self.prediction.t().dot(&latent); // P x N
        d.mapv_inplace(|x| x * self.theta);
        d += &self.offsets;
        d
    }

    /// True objective: smoothed loss plus the row-norm penalty.
    pub fn objective(&self, u: ArrayView2<f64>) -> f64 {
        self.ctx.loss_sum(self.decisions(u).view(), self.labels) + self.gamma_b * l21_norm(u)
    }

    /// Majorized objective at fixed reweighting `diag`: the loss plus the
    /// quadratic `gamma_b * sum_i diag_i |u^i|^2`. Used by tests to probe
    /// the surface the gradient actually differentiates.
    pub fn surrogate_objective(&self, u: ArrayView2<f64>, diag: ArrayView1<f64>) -> f64 {
        let quad: f64 = u
            .axis_iter(Axis(0))
            .zip(diag.iter())
            .map(|(row, &d)| d * row.dot(&row))
            .sum();
        self.ctx.loss_sum(self.decisions(u).view(), self.labels) + self.gamma_b * quad
    }

    /// Gradient of the majorized objective at fixed `diag`.
    pub fn gradient(&self, u: ArrayView2<f64>, diag: ArrayView1<f64>) -> Array2<f64> {
        let duals = self
            .ctx
            .weighted_duals(self.decisions(u).view(), self.labels); // P x N of y*nu
        // Loss part: -theta_v * X * duals' * W'.
        let mut grad = self.features.dot(&duals.t().dot(&self.prediction.t()));
        grad.mapv_inplace(|g| -self.theta * g);
        for (i, (mut row, &d)) in grad.axis_iter_mut(Axis(0)).zip(diag.iter()).enumerate() {
            row.scaled_add(2.0 * self.gamma_b * d, &u.row(i));
        }
        grad
    }

    /// Step-size constant for the current reweighting: a bound on the loss
    /// curvature plus the curvature of the quadratic majorizer, which
    /// changes whenever `diag` is refreshed.
    pub fn lipschitz(&self, diag: ArrayView1<f64>) -> f64 {
        let (p, n) = (self.labels.ncols() as f64, self.labels.nrows() as f64);
        let mut worst_sample = 0.0f64;
        for (j, col) in self.features.axis_iter(Axis(1)).enumerate() {
            worst_sample = worst_sample.max(col.dot(&col) / self.ctx.x_inf()[j]);
        }
        let mut worst_task = 0.0f64;
        for col in self.prediction.axis_iter(Axis(1)) {
            worst_task = worst_task.max(col.dot(&col));
        }
        let max_diag = diag.iter().cloned().fold(0.0f64, f64::max);
        p * n * self.theta * self.theta / self.ctx.sigma() * worst_sample * worst_task
            + 2.0 * self.gamma_b * max_diag
    }

    /// Minimize the true objective from `u_init` by reweighted accelerated
    /// descent. Every iterate is screened: if the accelerated combination
    /// would raise the true objective, the plain gradient step is kept
    /// instead, so the reported sequence never increases. Returns the best
    /// iterate (which is then simply the last one).
    pub fn solve(
        &self,
        u_init: ArrayView2<f64>,
        epsilon: f64,
        max_iters: usize,
        floor: f64,
    ) -> Result<SubsolverRun<Array2<f64>>> {
        let mut u = u_init.to_owned();
        let mut diag = reweight_diag(u.view(), floor);
        let initial = self.objective(u.view());
        let mut objectives = vec![initial];
        let mut best = u.clone();
        let mut best_value = initial;
        let mut previous = initial;
        let mut converged = false;
        let mut history = Array2::<f64>::zeros(u.raw_dim());
        let anchor = u_init.to_owned();

        for t in 0..max_iters {
            let lipschitz = self.lipschitz(diag.view());
            if lipschitz <= 0.0 {
                converged = true;
                break;
            }
            let grad = self.gradient(u.view(), diag.view());
            let descent = &u - &(&grad * (1.0 / lipschitz));
            history.scaled_add((t as f64 + 1.0) / 2.0, &grad);
            let anchored = &anchor - &(&history * (1.0 / lipschitz));
            let t_f = t as f64;
            let combined =
                anchored * (2.0 / (t_f + 3.0)) + &descent * ((t_f + 1.0) / (t_f + 3.0));

            // Screen the accelerated combination against the plain step,
            // and both against standing still, so the reported sequence
            // can never increase.
            let combined_value = self.objective(combined.view());
            let descent_value = self.objective(descent.view());
            let (mut next, mut value) = if combined_value <= descent_value {
                (combined, combined_value)
            } else {
                (descent, descent_value)
            };
            if !value.is_finite() {
                return Err(Error::Divergence(format!(
                    "extraction objective became {} at inner step {}",
                    value, t
                )));
            }
            if value > previous {
                next = u.clone();
                value = previous;
            }
            objectives.push(value);
            if value < best_value {
                best_value = value;
                best = next.clone();
            }
            u = next;
            diag = reweight_diag(u.view(), floor);
            if improvement_stalled(value, previous, initial, epsilon) {
                converged = true;
                break;
            }
            previous = value;
        }

        Ok(SubsolverRun {
            solution: best,
            objectives,
            converged,
        })
    }
}

/// One full sweep over all extraction matrices, in modality order. Each
/// modality's frozen offsets are rebuilt from the working copies, so later
/// modalities see the updates of earlier ones.
#[derive(Debug)]
pub struct ExtractionStage {
    pub extraction: Vec<Array2<f64>>,
    /// Inner objective sequence per modality.
    pub objectives: Vec<Vec<f64>>,
    pub converged: bool,
}

pub fn solve_extraction(
    data: &MultiModalDataset,
    model: &Model,
    config: &SolverConfig,
) -> Result<ExtractionStage> {
    let mut working = model.clone();
    let mut objectives = Vec::with_capacity(data.n_modalities());
    let mut converged = true;
    for v in 0..data.n_modalities() {
        let run = {
            let sub =
                ExtractionSubproblem::build(data, &working, v, config.gamma_b, config.sigma)?;
            sub.solve(
                working.extraction[v].view(),
                config.epsilon,
                config.max_inner_iters,
                config.d_floor,
            )?
        };
        working.extraction[v] = run.solution;
        objectives.push(run.objectives);
        converged &= run.converged;
    }
    Ok(ExtractionStage {
        extraction: working.extraction,
        objectives,
        converged,
    })
}
