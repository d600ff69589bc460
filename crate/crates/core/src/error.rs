use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("incompatible definitions for variable `{0}`")]
    IncompatibleVariable(String),
    #[error("scope error: {0}")]
    Scope(String),
    #[error("evidence error: {0}")]
    Evidence(String),
    #[error("degenerate distribution: {0}")]
    Degenerate(String),
    #[error("division by zero in factor over {0}")]
    DivisionByZero(String),
    #[error("not a DAG: cycle {}", .0.join(" -> "))]
    NotADag(Vec<String>),
    #[error("ordering error: {0}")]
    Ordering(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("unknown name `{0}`")]
    Lookup(String),
    #[error("table too large: {size} entries exceeds cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("evidence has zero probability")]
    ZeroEvidence,
    #[error("model is not tree-structured")]
    NotATree,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("proposal assigns zero probability where the target is positive")]
    InfiniteWeight,
    #[error("sampler trapped: every state of `{0}` has zero conditional probability")]
    TrappedState(String),
    #[error("invalid proposal kernel: {0}")]
    InvalidKernel(String),
    #[error("state error: {0}")]
    State(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("feature error: {0}")]
    Feature(String),
    #[error("table for factor `{factor}` has length {found}, expected {expected}")]
    LengthMismatch { factor: String, found: usize, expected: usize },
    #[error("schema error at {path}: {rule}")]
    Schema { path: String, rule: String },
    #[error("dataset error at row {row}, column {col}: {message}")]
    Dataset { row: usize, col: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by malformed input rather than by the inference itself.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::ZeroEvidence
                | Error::NotATree
                | Error::TrappedState(_)
                | Error::InfiniteWeight
                | Error::Degenerate(_)
                | Error::DivisionByZero(_)
                | Error::TooLarge { .. }
                | Error::State(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
