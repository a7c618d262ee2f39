//! Sub-solver for the per-task margin classifiers.
//!
//! With the extraction matrices and modality weights fixed, each task `p`
//! has an independent smooth convex problem in its augmented weight vector
//! `w_p` (latent weights plus a trailing bias coordinate):
//!
//! ```text
//! F(w_p) = sum_n g(y_pn * w_p' z_n) + gamma_a * |w_p without bias|^2
//! ```
//!
//! over the bias-augmented latent samples `z_n`. The solver runs an
//! accelerated gradient scheme: a plain gradient step from the current
//! iterate, a weighted-gradient-history step anchored at the zero estimate,
//! and a convex combination of the two with weights `2/(t+3)` and
//! `(t+1)/(t+3)`. Accelerated iterates are not monotone, so the best
//! iterate seen is returned.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::data::MultiModalDataset;
use crate::error::{Error, Result};
use crate::hinge::SmoothingContext;
use crate::model::{Model, SolverConfig};
use crate::solver::{improvement_stalled, SubsolverRun};

/// Bias-augmented latent representation: the model's latent matrix with a
/// constant-one row appended, `(m+1) x N`.
pub fn build_latent(data: &MultiModalDataset, model: &Model) -> Result<Array2<f64>> {
    model.validate_against(data)?;
    let latent = model.latent(data);
    let mut out = Array2::ones((latent.nrows() + 1, latent.ncols()));
    out.slice_mut(ndarray::s![..latent.nrows(), ..])
        .assign(&latent);
    Ok(out)
}

/// The shared state of all per-task problems for one sweep: the augmented
/// latent samples, the labels, and the smoothing context.
#[derive(Debug)]
pub struct PredictionSubproblem<'a> {
    latent: Array2<f64>, // (m+1) x N, last row is the bias feature
    labels: ArrayView2<'a, f64>,
    ctx: SmoothingContext<'a>,
    gamma_a: f64,
}

impl<'a> PredictionSubproblem<'a> {
    /// Assemble the sub-problem from a dataset and the current model.
    pub fn build(
        data: &'a MultiModalDataset,
        model: &Model,
        gamma_a: f64,
        sigma: f64,
    ) -> Result<Self> {
        let latent = build_latent(data, model)?;
        Self::from_parts(
            latent,
            data.labels(),
            data.sample_inf_norms().view(),
            gamma_a,
            sigma,
        )
    }

    /// Assemble from raw parts. `latent` must already carry the bias row
    /// as its last row; only that row is exempt from regularization.
    pub fn from_parts(
        latent: Array2<f64>,
        labels: ArrayView2<'a, f64>,
        x_inf: ArrayView1<'a, f64>,
        gamma_a: f64,
        sigma: f64,
    ) -> Result<Self> {
        if latent.ncols() != labels.nrows() || latent.ncols() != x_inf.len() {
            return Err(Error::Shape(format!(
                "latent has {} samples, labels {}, norms {}",
                latent.ncols(),
                labels.nrows(),
                x_inf.len()
            )));
        }
        if latent.nrows() < 2 {
            return Err(Error::Shape(
                "augmented latent needs at least one weight row plus the bias row".into(),
            ));
        }
        let ctx = SmoothingContext::new(sigma, x_inf)?;
        Ok(Self {
            latent,
            labels,
            ctx,
            gamma_a,
        })
    }

    pub fn n_tasks(&self) -> usize {
        self.labels.ncols()
    }

    /// Augmented dimension `m + 1`.
    pub fn dim(&self) -> usize {
        self.latent.nrows()
    }

    fn decisions(&self, w: ArrayView1<f64>) -> Array1<f64> {
        self.latent.t().dot(&w)
    }

    /// Smoothed loss plus the ridge on the non-bias coordinates.
    pub fn objective(&self, task: usize, w: ArrayView1<f64>) -> f64 {
        let d = self.decisions(w);
        let mut loss = 0.0;
        for (n, &h) in d.iter().enumerate() {
            loss += crate::hinge::smoothed_hinge(
                self.labels[(n, task)] * h,
                self.ctx.x_inf()[n],
                self.ctx.sigma(),
            );
        }
        let m = self.dim() - 1;
        let ridge: f64 = w.slice(ndarray::s![..m]).iter().map(|x| x * x).sum();
        loss + self.gamma_a * ridge
    }

    /// Gradient of [`Self::objective`]. The loss part is the latent matrix
    /// times the per-sample weighted duals; the ridge part skips the bias.
    pub fn gradient(&self, task: usize, w: ArrayView1<f64>) -> Array1<f64> {
        let d = self.decisions(w);
        let sigma = self.ctx.sigma();
        let mut coeff = Array1::zeros(d.len());
        for (n, &h) in d.iter().enumerate() {
            let y = self.labels[(n, task)];
            let gap = 1.0 - y * h;
            coeff[n] = y * crate::hinge::dual_weight(gap, self.ctx.x_inf()[n], sigma);
        }
        let mut grad = self.latent.dot(&coeff);
        grad.mapv_inplace(|g| -g);
        let m = self.dim() - 1;
        for i in 0..m {
            grad[i] += 2.0 * self.gamma_a * w[i];
        }
        grad
    }

    /// Step-size constant: `(N / sigma) * max_n |z_n|^2 / x_inf_n` plus the
    /// ridge curvature. An upper bound for every task, so it is computed
    /// once per sweep.
    pub fn lipschitz(&self) -> f64 {
        let n = self.latent.ncols() as f64;
        let mut worst = 0.0f64;
        for (j, col) in self.latent.axis_iter(Axis(1)).enumerate() {
            worst = worst.max(col.dot(&col) / self.ctx.x_inf()[j]);
        }
        n / self.ctx.sigma() * worst + 2.0 * self.gamma_a
    }

    /// Solve one task's problem from the zero vector, which doubles as the
    /// anchor of the accelerated history step. `incumbent` (the previous
    /// estimate, if any) is returned instead when it beats every iterate.
    pub fn solve_task(
        &self,
        task: usize,
        incumbent: Option<ArrayView1<f64>>,
        epsilon: f64,
        max_iters: usize,
    ) -> Result<SubsolverRun<Array1<f64>>> {
        let dim = self.dim();
        let lipschitz = self.lipschitz();

        let mut w = Array1::<f64>::zeros(dim);
        let initial = self.objective(task, w.view());
        let mut objectives = vec![initial];
        let mut best = w.clone();
        let mut best_value = initial;
        let mut previous = initial;
        let mut converged = lipschitz <= 0.0; // zero curvature: nothing to move

        if lipschitz > 0.0 {
            let mut history = Array1::<f64>::zeros(dim);
            for t in 0..max_iters {
                let grad = self.gradient(task, w.view());
                // Plain gradient step.
                let descent = &w - &(&grad * (1.0 / lipschitz));
                // Weighted-history step, anchored at the zero estimate.
                history.scaled_add((t as f64 + 1.0) / 2.0, &grad);
                let anchored = &history * (-1.0 / lipschitz);
                // Convex combination of the two.
                let t_f = t as f64;
                let next = anchored * (2.0 / (t_f + 3.0)) + descent * ((t_f + 1.0) / (t_f + 3.0));

                let value = self.objective(task, next.view());
                if !value.is_finite() {
                    return Err(Error::Divergence(format!(
                        "task {} produced objective {} at inner step {}",
                        task, value, t
                    )));
                }
                objectives.push(value);
                if value < best_value {
                    best_value = value;
                    best = next.clone();
                }
                w = next;
                if improvement_stalled(value, previous, initial, epsilon) {
                    converged = true;
                    previous = value;
                    break;
                }
                previous = value;
            }
        }
        let _ = previous;

        if let Some(inc) = incumbent {
            if self.objective(task, inc) < best_value {
                best = inc.to_owned();
            }
        }
        Ok(SubsolverRun {
            solution: best,
            objectives,
            converged,
        })
    }
}

/// One full sweep over the prediction block.
#[derive(Debug)]
pub struct PredictionStage {
    /// Updated `m x P` prediction matrix.
    pub prediction: Array2<f64>,
    /// Updated per-task biases.
    pub bias: Array1<f64>,
    /// Inner objective sequence of every task's run.
    pub objectives: Vec<Vec<f64>>,
    pub converged: bool,
}

/// Re-solve every task's classifier against the current latent
/// representation. Tasks are independent and solved in parallel; each
/// task keeps its previous weights when they score better than the new
/// run, so the stage never worsens any per-task objective.
pub fn solve_prediction(
    data: &MultiModalDataset,
    model: &Model,
    config: &SolverConfig,
) -> Result<PredictionStage> {
    let sub = PredictionSubproblem::build(data, model, config.gamma_a, config.sigma)?;
    let m = model.latent_dim();

    let runs: Vec<SubsolverRun<Array1<f64>>> = (0..sub.n_tasks())
        .into_par_iter()
        .map(|p| {
            let mut incumbent = Array1::zeros(m + 1);
            incumbent
                .slice_mut(ndarray::s![..m])
                .assign(&model.prediction.column(p));
            incumbent[m] = model.bias[p];
            sub.solve_task(p, Some(incumbent.view()), config.epsilon, config.max_inner_iters)
        })
        .collect::<Result<_>>()?;

    let mut prediction = Array2::zeros((m, sub.n_tasks()));
    let mut bias = Array1::zeros(sub.n_tasks());
    for (p, run) in runs.iter().enumerate() {
        prediction
            .column_mut(p)
            .assign(&run.solution.slice(ndarray::s![..m]));
        bias[p] = run.solution[m];
    }
    Ok(PredictionStage {
        prediction,
        bias,
        converged: runs.iter().all(|r| r.converged),
        objectives: runs.into_iter().map(|r| r.objectives).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels_plus(n: usize) -> Array2<f64> {
        Array2::from_elem((n, 1), 1.0)
    }

    #[test]
    fn build_latent_with_unit_weight_copies_the_modality() {
        let data = MultiModalDataset::new(
            vec![array![[1.0, 2.0], [3.0, 4.0]], array![[9.0, 9.0]]],
            labels_plus(2),
        )
        .unwrap();
        let model = Model {
            extraction: vec![array![[1.0, 0.0], [0.0, 1.0]], array![[5.0, 5.0]]],
            prediction: Array2::zeros((2, 1)),
            bias: array![0.0],
            modality_weights: array![1.0, 0.0],
        };
        let z = build_latent(&data, &model).unwrap();
        assert_eq!(z, array![[1.0, 2.0], [3.0, 4.0], [1.0, 1.0]]);
    }

    #[test]
    fn build_latent_averages_equally_weighted_identical_modalities() {
        let x = array![[2.0, 4.0], [6.0, 8.0]];
        let data = MultiModalDataset::new(vec![x.clone(), x.clone()], labels_plus(2)).unwrap();
        let eye = array![[1.0, 0.0], [0.0, 1.0]];
        let model = Model {
            extraction: vec![eye.clone(), eye],
            prediction: Array2::zeros((2, 1)),
            bias: array![0.0],
            modality_weights: array![0.5, 0.5],
        };
        let z = build_latent(&data, &model).unwrap();
        assert_eq!(z, array![[2.0, 4.0], [6.0, 8.0], [1.0, 1.0]]);
    }

    #[test]
    fn build_latent_matches_a_naive_per_sample_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = [3usize, 2usize];
        let (n, m) = (5, 2);
        let modalities: Vec<Array2<f64>> = dims
            .iter()
            .map(|&d| Array2::from_shape_fn((d, n), |_| rng.gen_range(0.1..1.0)))
            .collect();
        let data = MultiModalDataset::new(modalities.clone(), labels_plus(n)).unwrap();
        let model = Model {
            extraction: dims
                .iter()
                .map(|&d| Array2::from_shape_fn((d, m), |_| rng.gen_range(-1.0..1.0)))
                .collect(),
            prediction: Array2::zeros((m, 1)),
            bias: array![0.0],
            modality_weights: array![0.7, 0.3],
        };
        let z = build_latent(&data, &model).unwrap();
        for s in 0..n {
            for j in 0..m {
                let mut expect = 0.0;
                for v in 0..2 {
                    for i in 0..dims[v] {
                        expect += model.modality_weights[v]
                            * model.extraction[v][(i, j)]
                            * modalities[v][(i, s)];
                    }
                }
                assert!((z[(j, s)] - expect).abs() < 1e-12);
            }
            assert_eq!(z[(m, s)], 1.0);
        }
    }

    fn single_sample_subproblem<'a>(
        latent: Array2<f64>,
        labels: &'a Array2<f64>,
        x_inf: &'a Array1<f64>,
        gamma_a: f64,
        sigma: f64,
    ) -> PredictionSubproblem<'a> {
        PredictionSubproblem::from_parts(latent, labels.view(), x_inf.view(), gamma_a, sigma)
            .unwrap()
    }

    use ndarray::Array1;

    #[test]
    fn gradient_at_zero_on_one_active_sample() {
        // One augmented sample (1, 1), positive label, sigma = 1, x_inf = 1:
        // the dual saturates at 1 and the gradient is -(1, 1).
        let labels = labels_plus(1);
        let x_inf = array![1.0];
        let sub = single_sample_subproblem(array![[1.0], [1.0]], &labels, &x_inf, 0.3, 1.0);
        let g = sub.gradient(0, array![0.0, 0.0].view());
        assert_eq!(g, array![-1.0, -1.0]);
    }

    #[test]
    fn satisfied_margins_leave_only_the_ridge_gradient() {
        // Sample (0, 1) with weight vector (0.4, 2.0): decision 2 > 1, so
        // the loss gradient vanishes and only the ridge on the non-bias
        // coordinate remains.
        let labels = labels_plus(1);
        let x_inf = array![1.0];
        let sub = single_sample_subproblem(array![[0.0], [1.0]], &labels, &x_inf, 0.3, 1.0);
        let g = sub.gradient(0, array![0.4, 2.0].view());
        assert!((g[0] - 2.0 * 0.3 * 0.4).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn step_constant_on_a_single_unit_sample() {
        let labels = labels_plus(1);
        let x_inf = array![1.0];
        let sub = single_sample_subproblem(array![[1.0], [0.0]], &labels, &x_inf, 0.1, 5.0);
        assert!((sub.lipschitz() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn step_constant_reduces_to_ridge_for_zero_latent() {
        let labels = labels_plus(2);
        let x_inf = array![1.0, 1.0];
        let sub = single_sample_subproblem(Array2::zeros((3, 2)), &labels, &x_inf, 0.25, 5.0);
        assert_eq!(sub.lipschitz(), 0.5);
    }

    #[test]
    fn step_constant_scales_quadratically_with_the_latent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let latent = Array2::from_shape_fn((3, 4), |_| rng.gen_range(-1.0..1.0));
        let labels = labels_plus(4);
        let x_inf = Array1::from_elem(4, 0.8);
        let gamma_a = 0.2;
        let l1 = single_sample_subproblem(latent.clone(), &labels, &x_inf, gamma_a, 5.0).lipschitz();
        let l2 = single_sample_subproblem(latent.mapv(|x| 2.0 * x), &labels, &x_inf, gamma_a, 5.0)
            .lipschitz();
        assert!((l2 - 2.0 * gamma_a - 4.0 * (l1 - 2.0 * gamma_a)).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 20 {
            let (n, dim) = (rng.gen_range(2..8), rng.gen_range(2..5));
            let latent = Array2::from_shape_fn((dim, n), |_| rng.gen_range(-1.0..1.0));
            let labels =
                Array2::from_shape_fn((n, 1), |_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
            let x_inf = Array1::from_shape_fn(n, |_| rng.gen_range(0.3..1.5));
            let sigma = rng.gen_range(0.5..4.0);
            let sub = single_sample_subproblem(latent.clone(), &labels, &x_inf, 0.15, sigma);
            let w = Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..1.0));

            // Keep every margin away from the two branch boundaries so the
            // finite-difference probe stays on one smooth piece.
            let clear = (0..n).all(|s| {
                let margin = labels[(s, 0)] * latent.column(s).dot(&w);
                (margin - 1.0).abs() > 1e-3
                    && (margin - (1.0 - sigma * x_inf[s])).abs() > 1e-3
            });
            if !clear {
                continue;
            }
            checked += 1;

            let analytic = sub.gradient(0, w.view());
            let h = 1e-6;
            let mut fd = Array1::zeros(dim);
            for i in 0..dim {
                let mut hi = w.clone();
                hi[i] += h;
                let mut lo = w.clone();
                lo[i] -= h;
                fd[i] = (sub.objective(0, hi.view()) - sub.objective(0, lo.view())) / (2.0 * h);
            }
            let err = (&analytic - &fd).mapv(f64::abs).sum();
            let scale = analytic.mapv(f64::abs).sum().max(1.0);
            assert!(err / scale < 1e-5, "gradient mismatch: {}", err / scale);
        }
    }

    #[test]
    fn zero_latent_rows_keep_zero_weights() {
        // Latent block is all zero except the bias row: no signal can move
        // the weight coordinates, only the bias drifts.
        let labels = array![[1.0], [-1.0], [1.0]];
        let x_inf = Array1::from_elem(3, 1.0);
        let mut latent = Array2::zeros((3, 3));
        latent.row_mut(2).fill(1.0);
        let sub = single_sample_subproblem(latent, &labels, &x_inf, 0.1, 5.0);
        let run = sub.solve_task(0, None, 1e-6, 200).unwrap();
        assert_eq!(run.solution[0], 0.0);
        assert_eq!(run.solution[1], 0.0);
    }

    #[test]
    fn runs_never_beat_the_zero_start_upward() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (n, dim) = (rng.gen_range(3..10), rng.gen_range(2..5));
            let latent = Array2::from_shape_fn((dim, n), |_| rng.gen_range(-1.0..1.0));
            let labels =
                Array2::from_shape_fn((n, 2), |_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
            let x_inf = Array1::from_shape_fn(n, |_| rng.gen_range(0.3..1.5));
            let sub = single_sample_subproblem(latent, &labels, &x_inf, 0.1, 2.0);
            for task in 0..2 {
                let run = sub.solve_task(task, None, 1e-4, 300).unwrap();
                let zero = Array1::zeros(sub.dim());
                assert!(
                    sub.objective(task, run.solution.view())
                        <= sub.objective(task, zero.view()) + 1e-12
                );
                assert_eq!(run.objectives[0], sub.objective(task, zero.view()));
            }
        }
    }

    fn small_random_instance(
        rng: &mut ChaCha8Rng,
        tasks: usize,
    ) -> (MultiModalDataset, Model, SolverConfig) {
        let dims = [4usize, 3usize];
        let n = 8;
        let m = 3;
        let modalities: Vec<Array2<f64>> = dims
            .iter()
            .map(|&d| Array2::from_shape_fn((d, n), |_| rng.gen_range(0.05..1.0)))
            .collect();
        let labels =
            Array2::from_shape_fn((n, tasks), |_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
        let data = MultiModalDataset::new(modalities, labels).unwrap();
        let model = Model {
            extraction: dims
                .iter()
                .map(|&d| Array2::from_shape_fn((d, m), |_| rng.gen_range(-0.5..0.5)))
                .collect(),
            prediction: Array2::from_shape_fn((m, tasks), |_| rng.gen_range(-0.5..0.5)),
            bias: Array1::from_shape_fn(tasks, |_| rng.gen_range(-0.2..0.2)),
            modality_weights: array![0.6, 0.4],
        };
        let mut config = SolverConfig::new(0.1, 0.1, 0.1);
        config.epsilon = 1e-4;
        config.max_inner_iters = 300;
        (data, model, config)
    }

    #[test]
    fn stage_never_worsens_any_task_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let (data, model, config) = small_random_instance(&mut rng, 3);
            let sub =
                PredictionSubproblem::build(&data, &model, config.gamma_a, config.sigma).unwrap();
            let stage = solve_prediction(&data, &model, &config).unwrap();
            let m = model.latent_dim();
            for p in 0..3 {
                let mut old = Array1::zeros(m + 1);
                old.slice_mut(ndarray::s![..m]).assign(&model.prediction.column(p));
                old[m] = model.bias[p];
                let mut new = Array1::zeros(m + 1);
                new.slice_mut(ndarray::s![..m]).assign(&stage.prediction.column(p));
                new[m] = stage.bias[p];
                assert!(
                    sub.objective(p, new.view()) <= sub.objective(p, old.view()) + 1e-12,
                    "task {} got worse",
                    p
                );
            }
        }
    }

    #[test]
    fn duplicated_tasks_get_identical_classifiers() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (data, mut model, config) = small_random_instance(&mut rng, 2);
        // Make task 2 a copy of task 1, labels and incumbents alike.
        let mut labels = data.labels().to_owned();
        let first = labels.column(0).to_owned();
        labels.column_mut(1).assign(&first);
        let data = MultiModalDataset::new(data.modalities().to_vec(), labels).unwrap();
        let first_col = model.prediction.column(0).to_owned();
        model.prediction.column_mut(1).assign(&first_col);
        model.bias[1] = model.bias[0];

        let stage = solve_prediction(&data, &model, &config).unwrap();
        assert_eq!(stage.prediction.column(0), stage.prediction.column(1));
        assert_eq!(stage.bias[0], stage.bias[1]);
    }

    #[test]
    fn permuting_tasks_permutes_the_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let (data, model, config) = small_random_instance(&mut rng, 2);
        let stage = solve_prediction(&data, &model, &config).unwrap();

        let swapped_labels = {
            let mut l = Array2::zeros((data.n_samples(), 2));
            l.column_mut(0).assign(&data.labels().column(1));
            l.column_mut(1).assign(&data.labels().column(0));
            l
        };
        let swapped_data =
            MultiModalDataset::new(data.modalities().to_vec(), swapped_labels).unwrap();
        let mut swapped_model = model.clone();
        let c0 = model.prediction.column(0).to_owned();
        let c1 = model.prediction.column(1).to_owned();
        swapped_model.prediction.column_mut(0).assign(&c1);
        swapped_model.prediction.column_mut(1).assign(&c0);
        swapped_model.bias = array![model.bias[1], model.bias[0]];

        let swapped_stage = solve_prediction(&swapped_data, &swapped_model, &config).unwrap();
        assert_eq!(stage.prediction.column(0), swapped_stage.prediction.column(1));
        assert_eq!(stage.prediction.column(1), swapped_stage.prediction.column(0));
        assert_eq!(stage.bias[0], swapped_stage.bias[1]);
    }
}
