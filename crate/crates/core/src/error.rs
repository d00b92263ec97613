use thiserror::Error;

/// Errors raised by the laboratory's operations.
///
/// Refutations are not errors: a failed condition check comes back as a
/// [`Certificate`](crate::Certificate) with a refuted verdict. These variants
/// cover malformed input and broken user callables.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("metric violation: distance evaluated to {value}")]
    MetricViolation { value: f64 },

    #[error("map `{label}` failed at iterate {index}: {message}")]
    MapFailed {
        label: String,
        index: usize,
        message: String,
    },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
