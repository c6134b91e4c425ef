use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] io::Error),

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: duplicate document id {id:?}")]
    DuplicateId { line: usize, id: String },

    #[error("line {line}: language {lang:?} is not part of pair {pair}")]
    LanguageNotInPair { line: usize, lang: String, pair: String },

    #[error("invalid language pair: {0}")]
    InvalidPair(String),

    #[error("invalid script profile: {0}")]
    InvalidProfile(String),

    #[error("embedding file: {0}")]
    Embedding(String),

    #[error("non-finite embedding value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("row {row} of the {which} matrix has zero norm")]
    ZeroNorm { which: &'static str, row: usize },

    #[error("document {doc_id}: {message}")]
    Document { doc_id: String, message: String },

    #[error("document id {0:?} appears in both the main corpus and the holdout pool")]
    IdCollision(String),

    #[error("insufficient {what}: need {needed}, have {available} (shortfall {shortfall})")]
    Insufficient {
        what: &'static str,
        needed: u64,
        available: u64,
        shortfall: u64,
    },

    #[error("backend error: {0}")]
    Backend(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
