use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// Violated sort order in a detection stream.
    #[error("stream `{stream}` is not sorted at index {index}: {detail}")]
    Unsorted {
        stream: &'static str,
        index: usize,
        detail: String,
    },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config: {0}")]
    Invalid(String),

    #[error("csv line {line}: {msg}")]
    Csv { line: u64, msg: String },

    #[error(transparent)]
    CsvBackend(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
