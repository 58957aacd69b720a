use std::path::PathBuf;

/// Errors produced by the clustering pipeline and its I/O layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A cell could not be parsed as a finite number. Rows and columns are 1-based.
    #[error("{source_name}: row {row}, column {column}: {message}")]
    Parse {
        source_name: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{source_name}: row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        source_name: String,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    /// The data carries no usable structure (e.g. every point identical).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
