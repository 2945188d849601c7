use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing required column `{column}` in header")]
    MissingColumn { path: PathBuf, column: &'static str },

    #[error("{path}: row {row}: unknown label `{label}` (expected `suicide` or `non-suicide`)")]
    UnknownLabel {
        path: PathBuf,
        row: usize,
        label: String,
    },

    #[error("{path}: malformed CSV: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    TokenOutOfRange { id: u32, vocab_size: usize },

    #[error("sequence of length {len} is shorter than the convolution kernel ({kernel})")]
    SequenceTooShort { len: usize, kernel: usize },

    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    #[error(
        "exact Shapley enumeration supports at most {cap} maskable tokens, got {got}; use sampled mode instead"
    )]
    TooManyPlayers { got: usize, cap: usize },

    #[error("model container: {0}")]
    Container(String),

    #[error("unsupported container version {found} (this build reads version {expected})")]
    ContainerVersion { found: u32, expected: u32 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
