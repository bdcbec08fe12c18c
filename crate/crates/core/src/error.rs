use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("label column `{0}` not found")]
    MissingColumn(String),

    #[error("duplicate column name `{0}`")]
    DuplicateName(String),

    #[error("dataset has a single class `{0}`; at least two are required")]
    SingleClass(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for {len} {what}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("child counts do not partition the parent counts")]
    PartitionMismatch,

    #[error("empty node")]
    EmptyNode,

    #[error("empty feature selection")]
    EmptySelection,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed input files rather than bad parameters.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::MissingColumn(_)
                | Error::DuplicateName(_)
                | Error::SingleClass(_)
                | Error::InvalidDataset(_)
                | Error::Json(_)
        )
    }
}
