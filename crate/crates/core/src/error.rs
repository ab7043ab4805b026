use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}: at least 2 is required")]
    InvalidDimension(usize),

    #[error("composite dimension {requested} exceeds cap {cap}")]
    CompositeCapExceeded { requested: usize, cap: usize },

    /// A matrix or vector failed one of its defining invariants.
    #[error("invariant violated: {invariant} (residual {residual:.3e})")]
    Invariant {
        invariant: &'static str,
        residual: f64,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unknown outcome label {0:?}")]
    UnknownOutcome(String),

    #[error("event lies outside the declared outcome space: {0:?}")]
    EventOutsideSpace(Vec<String>),

    #[error("measurement family is not tomographically complete: rank {rank} of {required}")]
    Incomplete { rank: usize, required: usize },

    #[error("data impossible under prior support at trial {trial}")]
    ZeroLikelihood { trial: usize },

    #[error("outcome index {index} out of range for dimension {dim}")]
    OutcomeOutOfRange { index: usize, dim: usize },

    #[error("linear program failed: {0}")]
    Lp(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
