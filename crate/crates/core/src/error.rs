use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("seed stream exhausted: requested {requested} bits with {consumed} of {budget} consumed")]
    StreamExhausted {
        requested: usize,
        consumed: usize,
        budget: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("size cap exceeded: {what} needs {required}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("matrix is not a valid rotation: {0}")]
    NotOrthogonal(String),

    #[error("generator set rejected: {0}")]
    InvalidGeneratorSet(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("degenerate output: {0}")]
    Degenerate(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// True for failures caused by exceeding a size or resource limit, as
    /// opposed to invalid input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::StreamExhausted { .. } | Error::Overflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
