use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown column: {0}")]
    Name(String),
    #[error("duplicate column name: {0}")]
    DuplicateName(String),
    #[error("row id {id} out of bounds for {n_rows} physical rows")]
    Bounds { id: usize, n_rows: usize },
    #[error("dictionary code {code} out of range for dictionary of size {len}")]
    Code { code: u64, len: usize },
    #[error("column length mismatch: {column} has {actual} rows, expected {expected}")]
    Length {
        column: String,
        expected: usize,
        actual: usize,
    },
    #[error("expression error: {0}")]
    Expr(String),
    #[error("aggregation error: {0}")]
    Agg(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("join error: {0}")]
    Join(String),
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
