//! Reference methods the joint solver is compared against.
//!
//! Two row-sparse regression baselines operate on the concatenated
//! features: one minimizes a robust per-sample residual norm plus a
//! row-norm penalty, the other a mean squared residual plus the same
//! penalty. Both are solved by iteratively reweighted least squares:
//! the row norms are majorized by quadratics, each sweep solves one
//! positive-definite linear system, and the weights are refreshed from
//! the new solution. Two non-learning pipelines — nearest neighbor on
//! the concatenated features, and nearest neighbor on the single best
//! modality — complete the comparison set.

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::data::MultiModalDataset;
use crate::error::{Error, Result};
use crate::eval::{knn_classify, single_label_classes};
use crate::linalg::row_norms;

/// A regression problem on bias-augmented concatenated features:
/// `(d+1) x N` features whose last row is constant one, and `N x P`
/// regression targets.
#[derive(Debug, Clone)]
pub struct ConcatProblem {
    features: Array2<f64>,
    targets: Array2<f64>,
    gamma: f64,
}

impl ConcatProblem {
    /// Wrap raw `d x N` features (the ones row is appended here) and
    /// `N x P` targets.
    pub fn new(features: Array2<f64>, targets: Array2<f64>, gamma: f64) -> Result<Self> {
        if features.ncols() != targets.nrows() {
            return Err(Error::Shape(format!(
                "{} feature columns but {} target rows",
                features.ncols(),
                targets.nrows()
            )));
        }
        if features.nrows() == 0 || targets.ncols() == 0 || features.ncols() == 0 {
            return Err(Error::Shape("empty regression problem".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Value(format!(
                "penalty weight must be positive, got {}",
                gamma
            )));
        }
        let mut augmented = Array2::ones((features.nrows() + 1, features.ncols()));
        augmented
            .slice_mut(s![..features.nrows(), ..])
            .assign(&features);
        Ok(Self {
            features: augmented,
            targets,
            gamma,
        })
    }

    /// Build from a dataset: concatenated modalities as features, the
    /// label matrix as regression targets.
    pub fn from_dataset(data: &MultiModalDataset, gamma: f64) -> Result<Self> {
        Self::new(data.concat_features(), data.labels().to_owned(), gamma)
    }

    /// Raw feature count, bias row excluded.
    pub fn n_features(&self) -> usize {
        self.features.nrows() - 1
    }

    fn residuals(&self, coefficients: &Array2<f64>) -> Array2<f64> {
        self.features.t().dot(coefficients) - &self.targets
    }
}

/// A fitted baseline: `(d+1) x P` coefficients whose last row is the
/// bias, plus the objective value after each reweighting sweep.
#[derive(Debug, Clone)]
pub struct BaselineFit {
    pub coefficients: Array2<f64>,
    pub objective_trace: Vec<f64>,
    /// How many times a linear solve needed a diagonal safety bump.
    pub ridge_bumps: usize,
    pub converged: bool,
}

impl BaselineFit {
    /// Coefficient rows of the actual features (bias excluded); their
    /// norms are the feature scores.
    pub fn feature_rows(&self) -> ArrayView2<'_, f64> {
        self.coefficients.slice(s![..self.coefficients.nrows() - 1, ..])
    }
}

fn to_dmatrix(a: ArrayView2<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Solve the positive-definite system `M U = R`, bumping the diagonal by
/// escalating multiples of its mean when the factorization fails.
fn solve_spd(
    m: &nalgebra::DMatrix<f64>,
    rhs: &nalgebra::DMatrix<f64>,
    bumps_used: &mut usize,
) -> Result<nalgebra::DMatrix<f64>> {
    let mean_diag = m.diagonal().mean().max(f64::MIN_POSITIVE);
    let mut attempt = m.clone();
    for bump in [0.0, 1e-10, 1e-8, 1e-6] {
        if bump > 0.0 {
            *bumps_used += 1;
            attempt = m.clone();
            for i in 0..attempt.nrows() {
                attempt[(i, i)] += bump * mean_diag;
            }
        }
        if let Some(chol) = attempt.clone().cholesky() {
            return Ok(chol.solve(rhs));
        }
    }
    Err(Error::Divergence(
        "reweighted system is not positive definite even after diagonal bumps".into(),
    ))
}

/// How the per-sample residuals enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ResidualWeighting {
    /// Sum of per-sample residual norms, reweighted every sweep.
    RobustNorm,
    /// Mean squared residual, fixed weights `1/N`.
    MeanSquare,
}

fn solve_reweighted(
    problem: &ConcatProblem,
    weighting: ResidualWeighting,
    max_iters: usize,
    tol: f64,
    floor: f64,
) -> Result<BaselineFit> {
    if max_iters == 0 {
        return Err(Error::Value("need at least one sweep".into()));
    }
    if !(tol > 0.0 && floor > 0.0) {
        return Err(Error::Value(format!(
            "tolerance and floor must be positive, got {} and {}",
            tol, floor
        )));
    }
    let x = &problem.features; // (d+1) x N
    let n = x.ncols();
    let dim = x.nrows();

    let objective = |coefficients: &Array2<f64>| -> f64 {
        let residuals = problem.residuals(coefficients);
        let data_term = match weighting {
            ResidualWeighting::RobustNorm => row_norms(residuals.view()).sum(),
            ResidualWeighting::MeanSquare => {
                residuals.iter().map(|r| r * r).sum::<f64>() / n as f64
            }
        };
        let penalty = row_norms(coefficients.slice(s![..dim - 1, ..])).sum();
        data_term + problem.gamma * penalty
    };

    // Identity-weight start: unit residual weights (or the fixed 1/N) and
    // unit row weights, bias unpenalized.
    let mut residual_weights = match weighting {
        ResidualWeighting::RobustNorm => Array1::ones(n),
        ResidualWeighting::MeanSquare => Array1::from_elem(n, 1.0 / n as f64),
    };
    let mut row_weights = Array1::ones(dim);
    row_weights[dim - 1] = 0.0;

    let mut coefficients = Array2::zeros((dim, problem.targets.ncols()));
    let mut objective_trace = Vec::new();
    let mut ridge_bumps = 0;
    let mut converged = false;

    for _ in 0..max_iters {
        // Assemble X D1 X' + gamma D2 and X D1 Y.
        let mut weighted = x.to_owned();
        for (mut column, &w) in weighted.columns_mut().into_iter().zip(&residual_weights) {
            column.mapv_inplace(|v| v * w);
        }
        let mut system = to_dmatrix(weighted.dot(&x.t()).view());
        for i in 0..dim {
            system[(i, i)] += problem.gamma * row_weights[i];
        }
        let rhs = to_dmatrix(weighted.dot(&problem.targets).view());

        let solution = solve_spd(&system, &rhs, &mut ridge_bumps)?;
        for i in 0..dim {
            for j in 0..coefficients.ncols() {
                coefficients[(i, j)] = solution[(i, j)];
            }
        }

        let value = objective(&coefficients);
        if !value.is_finite() {
            return Err(Error::Divergence(format!(
                "baseline objective became {}",
                value
            )));
        }
        let done = objective_trace
            .last()
            .is_some_and(|&prev: &f64| (prev - value).abs() <= tol * prev.abs().max(1e-300));
        objective_trace.push(value);
        if done {
            converged = true;
            break;
        }

        // Refresh the majorizer weights from the new solution.
        if weighting == ResidualWeighting::RobustNorm {
            let norms = row_norms(problem.residuals(&coefficients).view());
            residual_weights = norms.mapv(|r| 1.0 / (2.0 * r.max(floor)));
        }
        let norms = row_norms(coefficients.slice(s![..dim - 1, ..]));
        for i in 0..dim - 1 {
            row_weights[i] = 1.0 / (2.0 * norms[i].max(floor));
        }
    }

    Ok(BaselineFit {
        coefficients,
        objective_trace,
        ridge_bumps,
        converged,
    })
}

/// Robust row-sparse regression: per-sample residual norms plus a
/// row-norm penalty, both reweighted every sweep.
pub fn solve_rfs(
    problem: &ConcatProblem,
    max_iters: usize,
    tol: f64,
    floor: f64,
) -> Result<BaselineFit> {
    solve_reweighted(problem, ResidualWeighting::RobustNorm, max_iters, tol, floor)
}

/// Row-sparse regression with a mean squared residual term; only the
/// penalty weights are refreshed.
pub fn solve_mtfs(
    problem: &ConcatProblem,
    max_iters: usize,
    tol: f64,
    floor: f64,
) -> Result<BaselineFit> {
    solve_reweighted(problem, ResidualWeighting::MeanSquare, max_iters, tol, floor)
}

/// Non-learning comparison pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePipeline {
    /// Nearest neighbor on the single modality that classifies the
    /// training set best (leave-one-out).
    BestSingleModality,
    /// Nearest neighbor on all modalities concatenated.
    Concatenation,
}

/// Predictions of a reference pipeline on the test samples.
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub predictions: Vec<usize>,
    /// Which modality the single-modality pipeline chose.
    pub chosen_modality: Option<usize>,
}

/// Leave-one-out nearest-neighbor accuracy, samples as rows.
fn loo_accuracy(features: ArrayView2<f64>, classes: &[usize]) -> f64 {
    let n = features.nrows();
    let mut hits = 0usize;
    for i in 0..n {
        let query = features.row(i);
        let mut best = usize::MAX;
        let mut best_dist = f64::INFINITY;
        for j in 0..n {
            if j == i {
                continue;
            }
            let diff = &query - &features.row(j);
            let dist = diff.dot(&diff);
            if dist < best_dist {
                best_dist = dist;
                best = j;
            }
        }
        if classes[best] == classes[i] {
            hits += 1;
        }
    }
    hits as f64 / n as f64
}

/// Run a reference pipeline: nearest neighbor from `train` to `test`.
pub fn run_reference(
    train: &MultiModalDataset,
    test: &MultiModalDataset,
    pipeline: ReferencePipeline,
) -> Result<ReferenceRun> {
    if train.modality_dims() != test.modality_dims() {
        return Err(Error::Shape(format!(
            "training modalities {:?} but test modalities {:?}",
            train.modality_dims(),
            test.modality_dims()
        )));
    }
    let classes = single_label_classes(train.labels())?;
    match pipeline {
        ReferencePipeline::Concatenation => {
            let train_x = train.concat_features();
            let test_x = test.concat_features();
            let predictions =
                knn_classify(train_x.t(), &classes, test_x.t())?;
            Ok(ReferenceRun {
                predictions,
                chosen_modality: None,
            })
        }
        ReferencePipeline::BestSingleModality => {
            if train.n_samples() < 2 {
                return Err(Error::Value(
                    "picking a modality needs at least two training samples".into(),
                ));
            }
            let mut chosen = 0;
            let mut chosen_accuracy = -1.0;
            for v in 0..train.n_modalities() {
                let score = loo_accuracy(train.modality(v).t(), &classes);
                if score > chosen_accuracy {
                    chosen_accuracy = score;
                    chosen = v;
                }
            }
            let predictions = knn_classify(
                train.modality(chosen).t(),
                &classes,
                test.modality(chosen).t(),
            )?;
            Ok(ReferenceRun {
                predictions,
                chosen_modality: Some(chosen),
            })
        }
    }
}
