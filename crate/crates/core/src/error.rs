use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A design-point field lies outside its candidate set.
    #[error("{message}")]
    Validation { field: &'static str, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Structured-text input could not be parsed.
    #[error("{source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },

    #[error("calibration invariant violated: {0}")]
    Calibration(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty design space")]
    EmptySpace,

    #[error("trace exceeded the cap of {cap} events")]
    TraceCapExceeded {
        cap: usize,
        partial: Vec<crate::scheduler::TraceEvent>,
    },
}

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
