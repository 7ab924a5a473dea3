use thiserror::Error;

/// Errors reported by this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid channel parameters: {0}")]
    InvalidChannel(String),
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("expected {what} of length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{what} = {value} exceeds the enumeration limit {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no degree d <= {cap} reaches the target; G({cap}) = {g_at_cap}")]
    DegreeCapExceeded { cap: usize, g_at_cap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
