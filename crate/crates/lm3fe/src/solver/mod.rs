//! Accelerated first-order solvers for the three blocks of the model.
//!
//! Each block is optimized by its own sub-solver while the others stay
//! fixed: [`prediction`] updates the per-task margin classifiers,
//! [`extraction`] updates the per-modality extraction matrices under the
//! reweighted l2,1 penalty, and [`weights`] updates the non-negative
//! modality weights by projected accelerated gradient steps.
//!
//! All three share the same stopping rule: stop once the last objective
//! improvement is at most `epsilon` of the total improvement since the
//! start (or vanishes in absolute terms).

pub mod extraction;
pub mod prediction;
pub mod weights;

/// Improvements below this are treated as converged regardless of the
/// relative criterion, to avoid stalling on floating-point noise.
pub(crate) const ABSOLUTE_IMPROVEMENT_FLOOR: f64 = 1e-15;

/// Result of one inner solver call.
#[derive(Debug, Clone)]
pub struct SubsolverRun<T> {
    /// The iterate with the lowest recorded objective.
    pub solution: T,
    /// Objective value at the initial point and after every iteration.
    pub objectives: Vec<f64>,
    /// Whether the stopping rule fired within the iteration budget.
    pub converged: bool,
}

/// Shared stopping rule: the latest improvement relative to the total
/// improvement since the initial point.
pub(crate) fn improvement_stalled(current: f64, previous: f64, initial: f64, epsilon: f64) -> bool {
    let step = (current - previous).abs();
    let total = (current - initial).abs();
    step < ABSOLUTE_IMPROVEMENT_FLOOR || step <= epsilon * total
}
