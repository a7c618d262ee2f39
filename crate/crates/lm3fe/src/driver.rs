//! Outer alternating-optimization loop.
//!
//! One sweep re-solves the three blocks in order — classifiers, extraction
//! matrices (modality by modality), modality weights — each against the
//! latest values of the others. Every block solver warm-starts from (or
//! falls back to) the current estimate, so the full objective cannot go up
//! across a stage; the driver still measures it after every stage and
//! records any numerical violation instead of hiding it.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::MultiModalDataset;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, l21_norm};
use crate::model::{Model, SolverConfig};
use crate::solver::extraction::solve_extraction;
use crate::solver::prediction::solve_prediction;
use crate::solver::weights::solve_modality_weights;
use crate::solver::improvement_stalled;

/// The full objective split into its four terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    /// Smoothed hinge loss summed over tasks and samples.
    pub loss: f64,
    /// Ridge on the prediction matrix (biases excluded).
    pub reg_prediction: f64,
    /// Row-norm penalty summed over the extraction matrices.
    pub reg_extraction: f64,
    /// Ridge on the modality weights.
    pub reg_weights: f64,
    pub total: f64,
}

/// Inner objective traces of one outer sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTrace {
    /// Per-task objective sequences of the classifier stage.
    pub prediction: Vec<Vec<f64>>,
    /// Per-modality objective sequences of the extraction stage.
    pub extraction: Vec<Vec<f64>>,
    /// Objective sequence of the weight stage.
    pub modality_weights: Vec<f64>,
}

/// A stage that measurably increased the full objective. The block
/// solvers are built so this cannot happen beyond rounding noise; any
/// entry here points at a numerical problem worth investigating.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub sweep: usize,
    pub stage: String,
    pub before: f64,
    pub after: f64,
}

/// Everything the outer loop observed while fitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Objective after initialization and after each completed sweep.
    pub outer: Vec<ObjectiveBreakdown>,
    pub sweeps: Vec<SweepTrace>,
    pub monotonicity_violations: Vec<MonotonicityViolation>,
    /// Whether the relative-improvement stop fired within the sweep budget.
    pub converged: bool,
}

/// Starting point of the alternating scheme: small uniform random
/// extraction matrices scaled by `1 / sqrt(rows * columns)`, uniform
/// modality weights summing to one, and zero classifiers.
pub fn initialize(data: &MultiModalDataset, config: &SolverConfig) -> Result<Model> {
    config.validate()?;
    let m = config.latent_dim.unwrap_or_else(|| data.n_tasks());
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut extraction = Vec::with_capacity(data.n_modalities());
    for d in data.modality_dims() {
        let scale = 1.0 / ((d * m) as f64).sqrt();
        let values: Vec<f64> = (0..d * m).map(|_| rng.gen_range(-scale..scale)).collect();
        extraction.push(Array2::from_shape_vec((d, m), values).expect("length matches shape"));
    }
    let v = data.n_modalities();
    Ok(Model {
        extraction,
        prediction: Array2::zeros((m, data.n_tasks())),
        bias: Array1::zeros(data.n_tasks()),
        modality_weights: Array1::from_elem(v, 1.0 / v as f64),
    })
}

/// Measure the full objective of `model` on `data`.
pub fn evaluate_objective(
    data: &MultiModalDataset,
    model: &Model,
    config: &SolverConfig,
) -> ObjectiveBreakdown {
    let loss = crate::hinge::total_loss(model, data, config.sigma);
    let reg_prediction = config.gamma_a * frobenius_sq(model.prediction.view());
    let reg_extraction = config.gamma_b
        * model
            .extraction
            .iter()
            .map(|u| l21_norm(u.view()))
            .sum::<f64>();
    let reg_weights = config.gamma_c * model.modality_weights.dot(&model.modality_weights);
    ObjectiveBreakdown {
        loss,
        reg_prediction,
        reg_extraction,
        reg_weights,
        total: loss + reg_prediction + reg_extraction + reg_weights,
    }
}

fn tag_sweep(sweep: usize, stage: &str, err: Error) -> Error {
    match err {
        Error::Divergence(msg) => {
            Error::Divergence(format!("sweep {}, {} stage: {}", sweep, stage, msg))
        }
        other => other,
    }
}

fn note_violation(
    violations: &mut Vec<MonotonicityViolation>,
    sweep: usize,
    stage: &str,
    before: f64,
    after: f64,
) {
    if after - before > 1e-10 * before.abs().max(1.0) {
        violations.push(MonotonicityViolation {
            sweep,
            stage: stage.to_string(),
            before,
            after,
        });
    }
}

/// Fit a model by alternating sweeps until the relative objective
/// improvement falls below `config.epsilon` or the sweep budget runs out.
pub fn fit(data: &MultiModalDataset, config: &SolverConfig) -> Result<(Model, TraceRecord)> {
    let mut model = initialize(data, config)?;
    let mut outer = vec![evaluate_objective(data, &model, config)];
    let mut sweeps = Vec::new();
    let mut monotonicity_violations = Vec::new();
    let mut converged = false;

    for sweep in 0..config.max_outer_iters {
        let before_sweep = outer.last().expect("trace starts populated").total;

        let stage =
            solve_prediction(data, &model, config).map_err(|e| tag_sweep(sweep, "prediction", e))?;
        model.prediction = stage.prediction;
        model.bias = stage.bias;
        let after_prediction = evaluate_objective(data, &model, config).total;
        note_violation(
            &mut monotonicity_violations,
            sweep,
            "prediction",
            before_sweep,
            after_prediction,
        );
        let prediction_trace = stage.objectives;

        let stage =
            solve_extraction(data, &model, config).map_err(|e| tag_sweep(sweep, "extraction", e))?;
        model.extraction = stage.extraction;
        let after_extraction = evaluate_objective(data, &model, config).total;
        note_violation(
            &mut monotonicity_violations,
            sweep,
            "extraction",
            after_prediction,
            after_extraction,
        );
        let extraction_trace = stage.objectives;

        let stage = solve_modality_weights(data, &model, config)
            .map_err(|e| tag_sweep(sweep, "weights", e))?;
        model.modality_weights = stage.modality_weights;
        let breakdown = evaluate_objective(data, &model, config);
        note_violation(
            &mut monotonicity_violations,
            sweep,
            "weights",
            after_extraction,
            breakdown.total,
        );

        sweeps.push(SweepTrace {
            prediction: prediction_trace,
            extraction: extraction_trace,
            modality_weights: stage.objectives,
        });
        let initial = outer[0].total;
        let current = breakdown.total;
        outer.push(breakdown);
        if improvement_stalled(current, before_sweep, initial, config.epsilon) {
            converged = true;
            break;
        }
    }

    Ok((
        model,
        TraceRecord {
            outer,
            sweeps,
            monotonicity_violations,
            converged,
        },
    ))
}
