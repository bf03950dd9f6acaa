use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the recurmix library.
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the domain of the intensity model (e.g. `t <= 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input (dimension mismatch, empty dataset, bad name).
    #[error("input error: {0}")]
    Input(String),

    /// A parse failure in a text input, with the 1-based line number.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Log-space arithmetic failed to produce a finite value.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The objective became non-finite during optimization.
    #[error("parameter overflow: {0}")]
    ParameterOverflow(String),

    /// Every EM restart ended in failure.
    #[error("fitting failure: {0}")]
    FitFailure(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// An I/O failure on `path`.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from bad user input rather than a failed fit.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Input(_) | Error::Parse { .. } | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
