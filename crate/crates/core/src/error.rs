use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("cannot condition on outcome {0}: branch has zero probability")]
    DegenerateConditioning(u8),

    #[error("empty ensemble: no kept trials to average")]
    EmptyEnsemble,

    #[error("incomplete tomography data, missing Pauli strings: {}", .0.join(", "))]
    IncompleteData(Vec<String>),

    #[error("trace deviates from 1 by {0:e}")]
    TraceDeviation(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
