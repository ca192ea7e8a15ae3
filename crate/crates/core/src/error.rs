use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A coordinate sits on one of the singular manifolds of the flow.
    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("integration failed at T = {time}: {reason} (state Q = {q}, Y' = {yp})")]
    Integration {
        time: f64,
        q: f64,
        yp: f64,
        reason: String,
    },

    #[error("point {index} (seed {seed}) failed to integrate: {source}")]
    PointFailed {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("no period detected: {0}")]
    NoPeriod(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("unit mismatch: {0}")]
    UnitMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
