use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("record {record}: {message}")]
    MalformedRecord { record: usize, message: String },

    #[error("duplicate single-valued attribute `{key}` on token `{surface}`")]
    DuplicateAttribute { key: String, surface: String },

    #[error("invalid attribute `{text}`: {reason}")]
    InvalidAttribute { text: String, reason: &'static str },

    #[error("invalid pattern `{text}`: {reason}")]
    InvalidPattern { text: String, reason: String },

    #[error("both classes required (no {0} examples)")]
    MissingClass(&'static str),

    #[error("no attribute meets min_coverage")]
    EmptyAlphabet,

    #[error("no description registered for attribute key `{0}`")]
    UnknownKey(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("bad request: {0}")]
    BadRequest(String),

    #[error("invalid bundle: {0}")]
    InvalidBundle(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
