use std::path::PathBuf;

/// Errors produced by lattice construction, simulation, and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A configuration document could not be accepted.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("node index {index} out of range (lattice has {len} nodes)")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("nothing to plot: {0}")]
    EmptyPlot(&'static str),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("failed to start worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Config { .. } | Error::NodeOutOfRange { .. } | Error::EmptyPlot(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
