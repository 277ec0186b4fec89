use std::fmt;

/// Location-tagged parse failure for the text formats in this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(ParseError),

    #[error("graph contains a cycle")]
    Cycle,

    #[error("invalid DAG: {0}")]
    InvalidDag(String),

    #[error("invalid machine description: {0}")]
    InvalidMachine(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ILP variable budget exceeded: estimated {estimate} >= {limit}")]
    VariableBudget { estimate: usize, limit: usize },

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("solver backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("DAG too small for multilevel scheduling: {0}")]
    TooSmall(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
