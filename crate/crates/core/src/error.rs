use thiserror::Error;

/// Errors raised by the privatization, private-write and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero in the prime field")]
    DivisionByZero,
    #[error("bit length mismatch: {left} vs {right}")]
    LengthError { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionError { expected: usize, got: usize },
    #[error("coordinate ({lat}, {lon}) lies outside the grid")]
    OutOfGrid { lat: f64, lon: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("truthful value {value} is not in the domain of size {domain_size}")]
    InvalidTruth { value: u32, domain_size: u32 },
    #[error("privacy leakage is unbounded: {0}")]
    InfiniteLeakage(&'static str),
    #[error("privacy leakage is undefined: {0}")]
    UndefinedLeakage(&'static str),
    #[error("calibrated estimator divisor is zero")]
    DegenerateCalibration,
    #[error("malformed key encoding: {0}")]
    ParseError(String),
    #[error("submission has {got} of {expected} party shares")]
    IncompleteSubmission { expected: usize, got: usize },
    #[error("protocol abort: {0}")]
    ProtocolAbort(String),
    #[error("population spec: {0}")]
    SpecError(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
