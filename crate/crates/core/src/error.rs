use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty query")]
    EmptyQuery,

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unsupported statement: {0}")]
    UnsupportedStatement(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("schema mismatch: model expects {expected}, active configuration is {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("non-finite value in input vector {0}")]
    NonFiniteInput(String),

    #[error("label {label} of {query_id} is not 0 or 1")]
    InvalidLabel { query_id: String, label: u8 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid corpus size {0}: at least 10 entries are required")]
    InvalidCount(usize),

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("embedding provider error: {0}")]
    Provider(String),

    #[error("model format version {found} is not supported (expected {expected})")]
    FormatVersionMismatch { expected: u32, found: u64 },

    #[error("corrupt model: {0}")]
    CorruptModel(String),

    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },

    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
