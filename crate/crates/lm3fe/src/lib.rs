//! Large-margin multi-modal multi-task feature extraction.
//!
//! This crate fits a joint model over several feature modalities: one
//! extraction matrix per modality, a shared large-margin linear predictor
//! for multiple binary tasks, and a non-negative weight per modality. The
//! extraction matrices carry an l2,1 penalty, so their row norms double as
//! feature-importance scores for selection; the learned model can also
//! transform samples into the shared latent space.
//!
//! The three blocks (predictor, extraction matrices, modality weights) are
//! optimized alternately, each with an accelerated first-order method on a
//! smoothed hinge loss. See [`driver::fit`] for the outer loop, and the
//! [`eval`] module for selection, transformation, and benchmarking helpers.

pub mod baseline;
pub mod data;
pub mod driver;
pub mod error;
pub mod eval;
pub mod grids;
pub mod hinge;
pub mod io;
pub mod linalg;
pub mod model;
pub mod solver;
pub mod synth;

pub use data::{LabelEncoding, MultiModalDataset, NormalizationScheme};
pub use driver::{fit, initialize, ObjectiveBreakdown, TraceRecord};
pub use error::{Error, Result};
pub use model::{Model, SolverConfig};
