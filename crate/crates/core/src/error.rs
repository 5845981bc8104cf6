use thiserror::Error;

/// Errors raised by model construction, sampling and the file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation was called on a value in the wrong state,
    /// e.g. reading success flags from an unmarked trajectory.
    #[error("state error: {0}")]
    State(String),

    /// Simulation of a single cohort member failed.
    #[error("individual {index}: {source}")]
    Individual {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    /// Malformed input file; `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Malformed command-line input, naming the offending token.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
