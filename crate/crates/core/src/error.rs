use std::path::PathBuf;

use num_complex::Complex64;

/// Errors raised by the reconstruction library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },

    /// An iterative projection stopped before meeting its tolerance. The last
    /// iterate is kept so callers can decide whether it is good enough.
    #[error("projection did not converge after {iterations} iterations (residual {residual:.3e})")]
    ProjectionNotConverged {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<Complex64>,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
