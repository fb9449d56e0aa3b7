use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("direct convolution refused: grid {nx}x{ny} exceeds the {limit}-cell guard")]
    SizeGuard { nx: usize, ny: usize, limit: usize },

    #[error("spectral convolution left an imaginary residual of {residual:e} (limit {limit:e})")]
    ImaginaryResidual { residual: f64, limit: f64 },

    #[error("divergence at step {step}: {reason}")]
    Divergence { step: u64, reason: String },

    #[error("stability check failed; set waive_stability to run anyway\n{0}")]
    Unstable(crate::integrator::StabilityReport),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Config(#[from] crate::io::config::ConfigError),

    #[error("{context} ({path}): {source}")]
    Io {
        context: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(context: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            context,
            path: path.into(),
            source,
        }
    }
}
