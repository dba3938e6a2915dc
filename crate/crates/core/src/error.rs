use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: String,
        found: String,
    },

    #[error("matrix {0} is singular at the rank tolerance")]
    Singular(&'static str),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid super-linearization: {0}")]
    Invalid(String),

    #[error("infeasible instance specification: {0}")]
    Infeasible(String),

    #[error("non-finite state encountered at t = {time}")]
    FiniteEscape { time: f64 },

    #[error("invalid control signal: {0}")]
    Signal(String),

    #[error("malformed document at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("shape error in field \"{field}\": {message}")]
    Shape { field: String, message: String },

    #[error("unknown format_version \"{0}\" (expected \"1\")")]
    UnknownVersion(String),
}

impl Error {
    pub(crate) fn dims(what: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn shape(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Shape {
            field: field.into(),
            message: message.into(),
        }
    }
}
