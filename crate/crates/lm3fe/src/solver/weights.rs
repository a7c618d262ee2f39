//! Sub-solver for the non-negative modality weights.
//!
//! With the extraction matrices and classifiers fixed, each decision value
//! is affine in the weight vector: for task `p` and sample `n` the
//! contribution of modality `v` is `w_p' U_v' x_n`, collected once into a
//! per-task projection matrix. The weights then minimize
//!
//! ```text
//! F(theta) = sum_{p,n} g(y_pn * (theta' s_pn + b_p)) + gamma_c * |theta|^2
//! ```
//!
//! over the non-negative orthant. The solver is a projected accelerated
//! gradient scheme: the gradient is taken at the last feasible iterate,
//! the step is launched from the extrapolated point, and the result is
//! clamped back onto the orthant. Extrapolation makes raw iterates
//! non-monotone, so the best feasible iterate seen is returned.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::data::MultiModalDataset;
use crate::error::{Error, Result};
use crate::hinge::SmoothingContext;
use crate::model::{Model, SolverConfig};
use crate::solver::{improvement_stalled, SubsolverRun};

/// Clamp every coordinate onto the non-negative orthant.
pub fn project_nonneg(mut v: Array1<f64>) -> Array1<f64> {
    v.mapv_inplace(|x| x.max(0.0));
    v
}

/// Momentum recursion of the accelerated scheme.
fn momentum_next(rho: f64) -> f64 {
    (1.0 + (4.0 * rho * rho + 1.0).sqrt()) / 2.0
}

/// The weight sub-problem with classifiers and extraction frozen.
#[derive(Debug)]
pub struct ModalityWeightSubproblem<'a> {
    /// One `V x N` matrix per task: entry `(v, n)` is the decision
    /// contribution of modality `v` to sample `n` under unit weight.
    projections: Vec<Array2<f64>>,
    bias: Array1<f64>,
    labels: ArrayView2<'a, f64>,
    gamma_c: f64,
    ctx: SmoothingContext<'a>,
}

impl<'a> ModalityWeightSubproblem<'a> {
    pub fn build(
        data: &'a MultiModalDataset,
        model: &Model,
        gamma_c: f64,
        sigma: f64,
    ) -> Result<Self> {
        model.validate_against(data)?;
        let tasks = data.n_tasks();
        let mut projections =
            vec![Array2::zeros((data.n_modalities(), data.n_samples())); tasks];
        for v in 0..data.n_modalities() {
            let latent_v = model.extraction[v].t().dot(&data.modality(v)); // m x N
            let scores_v = model.prediction.t().dot(&latent_v); // P x N
            for (p, proj) in projections.iter_mut().enumerate() {
                proj.row_mut(v).assign(&scores_v.row(p));
            }
        }
        Self::from_parts(
            projections,
            model.bias.clone(),
            data.labels(),
            gamma_c,
            sigma,
            data.sample_inf_norms().view(),
        )
    }

    pub fn from_parts(
        projections: Vec<Array2<f64>>,
        bias: Array1<f64>,
        labels: ArrayView2<'a, f64>,
        gamma_c: f64,
        sigma: f64,
        x_inf: ArrayView1<'a, f64>,
    ) -> Result<Self> {
        let (n, p) = (labels.nrows(), labels.ncols());
        if projections.len() != p || bias.len() != p {
            return Err(Error::Shape(format!(
                "{} tasks but {} projection blocks and {} biases",
                p,
                projections.len(),
                bias.len()
            )));
        }
        let modalities = projections.first().map_or(0, |m| m.nrows());
        if projections
            .iter()
            .any(|m| m.nrows() != modalities || m.ncols() != n)
        {
            return Err(Error::Shape(
                "projection blocks disagree on modality count or sample count".into(),
            ));
        }
        let ctx = SmoothingContext::new(sigma, x_inf)?;
        Ok(Self {
            projections,
            bias,
            labels,
            gamma_c,
            ctx,
        })
    }

    pub fn n_modalities(&self) -> usize {
        self.projections.first().map_or(0, |m| m.nrows())
    }

    fn decisions(&self, theta: ArrayView1<f64>) -> Array2<f64> {
        let (p, n) = (self.labels.ncols(), self.labels.nrows());
        let mut d = Array2::zeros((p, n));
        for (task, proj) in self.projections.iter().enumerate() {
            let row = theta.dot(proj); // N
            d.row_mut(task).assign(&row);
            d.row_mut(task).mapv_inplace(|x| x + self.bias[task]);
        }
        d
    }

    pub fn objective(&self, theta: ArrayView1<f64>) -> f64 {
        self.ctx.loss_sum(self.decisions(theta).view(), self.labels)
            + self.gamma_c * theta.dot(&theta)
    }

    pub fn gradient(&self, theta: ArrayView1<f64>) -> Array1<f64> {
        let duals = self
            .ctx
            .weighted_duals(self.decisions(theta).view(), self.labels); // P x N of y*nu
        let mut grad = Array1::zeros(self.n_modalities());
        for (task, proj) in self.projections.iter().enumerate() {
            grad.scaled_add(-1.0, &proj.dot(&duals.row(task)));
        }
        grad.scaled_add(2.0 * self.gamma_c, &theta.to_owned());
        grad
    }

    /// Step-size constant: `(P N / sigma) * max_{p,n} |s_pn|^2 / x_inf_n`
    /// plus the ridge curvature. Constant over the run.
    pub fn lipschitz(&self) -> f64 {
        let (p, n) = (self.labels.ncols() as f64, self.labels.nrows() as f64);
        let mut worst = 0.0f64;
        for proj in &self.projections {
            for (j, col) in proj.columns().into_iter().enumerate() {
                worst = worst.max(col.dot(&col) / self.ctx.x_inf()[j]);
            }
        }
        p * n / self.ctx.sigma() * worst + 2.0 * self.gamma_c
    }

    /// Minimize from `theta_init` (projected onto the orthant first).
    pub fn solve(
        &self,
        theta_init: ArrayView1<f64>,
        epsilon: f64,
        max_iters: usize,
    ) -> Result<SubsolverRun<Array1<f64>>> {
        if theta_init.len() != self.n_modalities() {
            return Err(Error::Shape(format!(
                "{} initial weights for {} modalities",
                theta_init.len(),
                self.n_modalities()
            )));
        }
        let lipschitz = self.lipschitz();
        let mut theta = project_nonneg(theta_init.to_owned());
        let initial = self.objective(theta.view());
        let mut objectives = vec![initial];
        let mut best = theta.clone();
        let mut best_value = initial;
        let mut previous = initial;
        let mut converged = lipschitz <= 0.0;

        if lipschitz > 0.0 {
            let mut extrapolated = theta.clone();
            let mut rho = 1.0f64;
            for t in 0..max_iters {
                let grad = self.gradient(theta.view());
                let next =
                    project_nonneg(&extrapolated - &(&grad * (1.0 / lipschitz)));
                let value = self.objective(next.view());
                if !value.is_finite() {
                    return Err(Error::Divergence(format!(
                        "weight objective became {} at inner step {}",
                        value, t
                    )));
                }
                objectives.push(value);
                if value < best_value {
                    best_value = value;
                    best = next.clone();
                }
                let rho_next = momentum_next(rho);
                let momentum = (rho - 1.0) / rho_next;
                extrapolated = &next + &((&next - &theta) * momentum);
                rho = rho_next;
                theta = next;
                if improvement_stalled(value, previous, initial, epsilon) {
                    converged = true;
                    break;
                }
                previous = value;
            }
        }

        debug_assert!(best.iter().all(|&x| x >= 0.0 && x.is_finite()));
        Ok(SubsolverRun {
            solution: best,
            objectives,
            converged,
        })
    }
}

/// Result of re-solving the weight block.
#[derive(Debug)]
pub struct WeightStage {
    pub modality_weights: Array1<f64>,
    pub objectives: Vec<f64>,
    pub converged: bool,
}

/// Re-solve the modality weights, warm-starting from the current ones so
/// the stage never worsens the sub-objective.
pub fn solve_modality_weights(
    data: &MultiModalDataset,
    model: &Model,
    config: &SolverConfig,
) -> Result<WeightStage> {
    let sub = ModalityWeightSubproblem::build(data, model, config.gamma_c, config.sigma)?;
    let run = sub.solve(
        model.modality_weights.view(),
        config.epsilon,
        config.max_inner_iters,
    )?;
    Ok(WeightStage {
        modality_weights: run.solution,
        objectives: run.objectives,
        converged: run.converged,
    })
}
