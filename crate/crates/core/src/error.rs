use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}:{line}: malformed record: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown chunk id `{0}`")]
    UnknownChunk(String),

    #[error(
        "embedding fingerprint mismatch: index built with `{index}`, provider is `{provider}`"
    )]
    FingerprintMismatch { index: String, provider: String },

    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("provider failure{}: {message}", .chunk_id.as_ref().map(|c| format!(" on chunk `{c}`")).unwrap_or_default())]
    Provider {
        chunk_id: Option<String>,
        message: String,
    },

    #[error("bad index file: {0}")]
    IndexFormat(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn provider(message: impl Into<String>) -> Self {
        Error::Provider {
            chunk_id: None,
            message: message.into(),
        }
    }
}
