use thiserror::Error;

/// Errors reported by the impairment models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input value violates an operation precondition or a type invariant.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A mathematical function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A computation failed numerically (singular system, non-finite result).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// An experiment or pilot configuration cannot be realized.
    #[error("configuration error: {0}")]
    Config(String),
    /// Inputs with incompatible sizes.
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A text file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

/// A single failed invariant, located by field name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Turns the first violation (if any) into a parameter error.
pub(crate) fn first_violation(violations: Vec<Violation>) -> Result<()> {
    match violations.into_iter().next() {
        None => Ok(()),
        Some(v) => Err(Error::Parameter(v.to_string())),
    }
}
