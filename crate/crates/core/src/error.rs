use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is missing, malformed or out of range.
    #[error("invalid configuration at `{key}`: {message}")]
    Config { key: String, message: String },

    /// A tabular or text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A numerical procedure failed to converge or produced non-finite output.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
