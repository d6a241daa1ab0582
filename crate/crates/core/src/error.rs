use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field values must be finite (first bad sample at index {index})")]
    NonFiniteField { index: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("unsupported Helmholtz shift {0}; expected 1 or 4")]
    UnsupportedShift(f64),

    #[error("invalid parameter function: {0}")]
    InvalidParam(String),

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("L1 mass diverges: {0}")]
    DivergentMass(String),

    #[error("non-finite values produced at t = {t}")]
    NonFinite { t: f64 },

    #[error("requested time {requested} outside stored range [{start}, {end}]")]
    OutOfRange {
        requested: f64,
        start: f64,
        end: f64,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("iteration {n} became unstable")]
    IterationUnstable { n: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
