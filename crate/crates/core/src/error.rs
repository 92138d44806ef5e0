use std::path::PathBuf;

use thiserror::Error;

use crate::spectrum::PeakReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Input is well-formed but carries no usable information
    /// (all-zero spectrum, all-zero observations, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver diverged at iteration {iteration}: relative residual {residual:.3e} (initial {initial:.3e})")]
    Divergence {
        iteration: usize,
        residual: f64,
        initial: f64,
        residuals: Vec<f64>,
    },

    #[error("found {found} of {requested} requested peaks")]
    DetectionFailure {
        requested: usize,
        found: usize,
        partial: PeakReport,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),

    /// Wraps an error raised inside one stage of the experiment pipeline.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures caused by user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Config(_) | Error::Domain(_) | Error::DimensionMismatch { .. }
        )
    }
}
