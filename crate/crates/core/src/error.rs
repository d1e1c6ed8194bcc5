use thiserror::Error;

/// Errors raised by the tensor, model, observer and oracle layers.
///
/// Mode indices in messages are one-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mode index {mode} out of range for tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (pivot {pivot:e} at step {step})")]
    NotPositiveDefinite { pivot: f64, step: usize },
    #[error("model does not supply derivative order {requested} (max {available})")]
    MissingDerivative { requested: usize, available: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("time {t} outside of signal span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integration broke down at t = {t}: {reason}")]
    Breakdown { t: f64, reason: String },
    #[error("output error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
