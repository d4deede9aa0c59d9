use crate::linalg::SpectralEstimate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension must be ≥ 1")]
    ZeroDimension,
    #[error("entry sequence length must be ≥ 1")]
    EmptySequence,
    #[error("distribution list is empty")]
    EmptySpecs,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("entry sequence too short: {kind} of dimension {n} needs {needed} values, got {got}")]
    InsufficientEntries {
        kind: &'static str,
        n: usize,
        needed: usize,
        got: usize,
    },
    #[error("index ({j}, {k}) out of range for dimension {n} (indices are 1-based)")]
    IndexOutOfRange { j: usize, k: usize, n: usize },
    #[error("dimension {n} exceeds dense cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("wrong ensemble: expected {expected}, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },
    #[error("coefficients violate the {kind} constraint at index {index}")]
    ConstraintViolated { kind: &'static str, index: usize },
    #[error("coefficient vector has length {got}, {kind} of dimension {n} needs {expected}")]
    CoeffLength {
        kind: &'static str,
        n: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("grid size {m} too small for degree {degree}: need {requirement}")]
    GridTooSmall {
        m: usize,
        degree: usize,
        requirement: &'static str,
    },
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("zero coefficient vector")]
    ZeroVector,
    #[error("iterative solver did not converge in {} iterations (residual {:.3e})", .0.iterations, .0.residual)]
    NotConverged(SpectralEstimate),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("nothing to report: {0}")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            requirement: "a positive finite real",
            value,
        })
    }
}
