use std::fmt;

/// Errors raised across ingestion, indexing, retrieval and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input file or record.
    #[error("format error{}: {message}", Location(.line))]
    Format { line: Option<usize>, message: String },

    /// Invalid parameters or missing resources for a requested stage.
    #[error("configuration error: {0}")]
    Config(String),

    /// A metric or statistic could not be computed.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// Duplicate or unknown document ids during indexing and scoring.
    #[error("index error: {0}")]
    Index(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Location<'a>(&'a Option<usize>);

impl fmt::Display for Location<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(line) => write!(f, " at line {line}"),
            None => Ok(()),
        }
    }
}

impl Error {
    pub(crate) fn format(message: impl Into<String>) -> Self {
        Error::Format { line: None, message: message.into() }
    }

    pub(crate) fn format_at(line: usize, message: impl Into<String>) -> Self {
        Error::Format { line: Some(line), message: message.into() }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Eval(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
