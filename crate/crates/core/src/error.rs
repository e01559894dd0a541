use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("singular operation: {0}")]
    Singular(String),

    #[error("{message} at {line}:{column}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("polynomial is not a Casimir (residual {0})")]
    NotCasimir(String),

    #[error("sampler found no in-domain point after {0} attempts")]
    Sampling(usize),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unknown(kind: &'static str, name: impl Into<String>) -> Self {
        Error::Unknown {
            kind,
            name: name.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
