use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Templates, spans and renderings do not line up.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("lookup miss for key {key:?}")]
    LookupMiss { key: String },

    #[error("unknown name(s): {}", .0.join(", "))]
    UnknownName(Vec<String>),

    #[error("backend error{}: {message}", .status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Backend { status: Option<u16>, message: String },

    #[error("empty response from backend")]
    EmptyResponse,

    #[error("cache miss for request {0}")]
    CacheMiss(String),

    #[error("mock backend has no fixture for {0:?}")]
    MockMiss(String),

    #[error("load error in record {index}: {message}")]
    Load { index: usize, message: String },

    #[error("record {index} rejected: {message}")]
    Rejected { index: usize, message: String },

    #[error("no answer found: {0}")]
    ExtractionMiss(String),

    #[error("metric undefined: {0}")]
    Degenerate(String),

    #[error("config error: {0}")]
    Config(String),

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
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
