use thiserror::Error;

/// Errors surfaced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input sequence is empty")]
    EmptyInput,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("window yields {peaks} R peaks, need at least 3")]
    DegenerateWindow { peaks: usize },

    #[error("training labels contain a single class; target correlation is undefined")]
    SingleClass,

    #[error("exhaustive solve supports at most {max} variables, got {n}")]
    Capacity { n: usize, max: usize },

    #[error("no usable windows: {reason}")]
    NoWindows { reason: String },

    #[error("{path}:{line}: {msg}")]
    Schema {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArg(msg.into())
    }

    /// Distinguishes bad inputs/configuration from failures at run time,
    /// mirroring the CLI exit-code contract (1 vs 2).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
