use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate signal: standard deviation is zero")]
    DegenerateSignal,

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid split: threshold {threshold} leaves one side empty")]
    InvalidSplit { threshold: f64 },

    #[error("invalid triple ({i}, {j}, {l}): {reason}")]
    InvalidTriple {
        i: usize,
        j: usize,
        l: usize,
        reason: &'static str,
    },

    #[error("invalid k = {k} for {available} training instances")]
    InvalidK { k: usize, available: usize },

    #[error("class `{class}` has {available} instances, need more than {requested}")]
    InsufficientClassSize {
        class: String,
        available: usize,
        requested: usize,
    },

    #[error("training error: {0}")]
    Training(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error in {path}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
