use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("QUBO matrix must have at least one variable")]
    EmptyMatrix,

    #[error("non-finite coefficient at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid encoding: {0}")]
    InvalidEncoding(String),

    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),

    #[error("exhaustive enumeration limited to {max} variables, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("constraint matrix has no positive violation quantum: {0}")]
    MalformedConstraint(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}
