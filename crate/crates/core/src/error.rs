use std::path::PathBuf;

use thiserror::Error;

use crate::network::ArcId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown arc id {0}")]
    UnknownArc(ArcId),

    /// The graph itself is malformed (dangling ends, bad matrix shapes, ...).
    #[error("invalid network structure: {0}")]
    Structure(String),

    /// A network that is well formed but violates a transmission condition.
    #[error("network validation failed: {0}")]
    Validation(String),

    #[error("{what} = {value} is outside the admissible interval [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error(
        "arc {arc}: L/h = {ratio} is not an integer; nearest admissible time steps are {suggestions:?}"
    )]
    GridMismatch {
        arc: ArcId,
        ratio: f64,
        suggestions: Vec<f64>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("steady state: {0}")]
    SteadyState(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
