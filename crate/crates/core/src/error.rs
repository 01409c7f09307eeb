use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("symbol id {id} is outside the vocabulary (size {total})")]
    SymbolOutOfRange { id: u32, total: u32 },

    #[error("symbol id {0} is not a raw byte symbol")]
    NotAByteSymbol(u32),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{0} is not invertible")]
    NotInvertible(String),

    #[error("decode failed: {0}")]
    Decode(String),

    #[error("metadata mismatch: {0}")]
    Metadata(String),

    #[error("bad model file: {0}")]
    ModelFormat(String),

    #[error("bad tokenizer file: {0}")]
    TokenizerFormat(String),

    #[error("corrupt shard {path} at offset {offset}: {reason}")]
    CorruptShard {
        path: PathBuf,
        offset: u64,
        reason: String,
    },

    #[error("bad corpus line {line}: {reason}")]
    Corpus { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps an I/O error so the message names `path`; the error kind (and
    /// therefore the CLI exit code) is kept.
    pub(crate) fn io_at(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        }
    }
}
