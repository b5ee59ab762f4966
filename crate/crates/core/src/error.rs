//! Error type shared across the library.

use std::fmt;

/// Library-wide error.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid configuration: mismatched dimensions, unsupported constellation
    /// order, inconsistent parameter shapes.
    Config(String),
    /// Invalid use of an API: wrong argument lengths, missing inputs.
    Usage(String),
    /// A numerical computation produced non-finite values. `iteration` is the
    /// detector layer / iteration at which divergence was detected.
    Numerical { what: String, iteration: usize },
    /// Problem instance too large for an exact method.
    Capacity(String),
    /// Training failed (divergent loss, non-finite gradients).
    Training(String),
    /// File or serialization error.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Numerical { what, iteration } => {
                write!(f, "numerical error at iteration {iteration}: {what}")
            }
            Error::Capacity(msg) => write!(f, "capacity error: {msg}"),
            Error::Training(msg) => write!(f, "training error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
