use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed JSON: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: missing or invalid field \"{field}\"")]
    Schema { line: usize, field: String },

    #[error("duplicate tweet id {0}")]
    DuplicateTweet(u64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("undefined {0}: zero denominator")]
    Undefined(&'static str),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the filesystem or stream rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
