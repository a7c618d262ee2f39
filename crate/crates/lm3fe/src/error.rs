//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A value is outside its admissible range (labels, fractions,
    /// configuration fields, ...).
    #[error("invalid value: {0}")]
    Value(String),

    /// A sample ended up with all-zero features, which the solvers cannot
    /// handle (per-sample max-abs norms are used as divisors).
    #[error("sample {0} has all-zero features")]
    DegenerateSample(usize),

    /// A solver produced a non-finite objective.
    #[error("solver diverged: {0}")]
    Divergence(String),

    /// Feature selection kept no features at all.
    #[error("selection kept no features")]
    EmptySelection,

    /// A file operation failed; the message carries the path. The cause
    /// is embedded in the message rather than chained as a source so
    /// that wrappers printing an error chain do not repeat it.
    #[error("i/o error: {0}")]
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
