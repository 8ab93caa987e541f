use thiserror::Error;

/// Errors produced by scheduling, curriculum, analysis and training code.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented bound. `field` names
    /// the offending parameter so CLI callers can echo it.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    /// A schedule cannot be produced from the given discretization.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// An argument lies outside its valid domain (e.g. a step index past K).
    #[error("domain error: {0}")]
    Domain(String),

    /// A sigma value was consumed that is not an element of the run's
    /// predefined noise array.
    #[error("audit failure: {message}; offending values: {offending:?}")]
    Audit {
        message: String,
        offending: Vec<f64>,
    },

    /// NaN or Inf showed up where finite numbers are required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Two point sets (or a model and its input) disagree on dimension.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Exit code the CLI maps this error to: 1 for validation, 2 for runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
