use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants are grouped the way the command-line front end reports them:
/// validation problems, resource/budget exhaustion and degenerate numerical
/// inputs each map to their own exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input object violates one of its invariants.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// A scalar parameter is outside the domain of the operation.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The requested enumeration exceeds the configured budget.
    #[error("budget exceeded: {what} needs {required} units, budget is {budget}")]
    Budget {
        what: String,
        required: f64,
        budget: u64,
    },

    /// A numerical input sits on a singular set of the formula being evaluated.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Integer sequences left the exactly representable range.
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
