use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the batch CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation
    /// (e.g. evaluating the interpolant outside `[0, t_f]`).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid input (bad configuration, mismatched shapes,
    /// non-SPD matrix, initial state outside the constraint set).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical failure during computation (singular tridiagonal solve,
    /// failed Cholesky factorization).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 for input errors, 2 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
