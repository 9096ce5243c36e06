use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value in {what} at coordinate {coordinate}")]
    NonFinite { what: &'static str, coordinate: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("objective is not built from quadratic pieces: {0}")]
    NotQuadratic(String),

    #[error("linear system is singular; add a ridge term (mu_reg > 0)")]
    Singular,

    #[error("{solver} diverged at iteration {iteration}: objective increased for {streak} consecutive iterations")]
    Divergence {
        solver: &'static str,
        iteration: usize,
        streak: usize,
    },

    #[error("{level} iteration {iteration}: {source}")]
    Nested {
        level: &'static str,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn nested(self, level: &'static str, iteration: usize) -> Error {
        Error::Nested {
            level,
            iteration,
            source: Box::new(self),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Error {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Walks through nesting wrappers to the originating error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Nested { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
