use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A digit beyond the stream's materialization cap was requested.
    #[error("digit {requested} exceeds the materialization cap of {cap} digits")]
    DigitCap { requested: u64, cap: u64 },

    /// A digit outside an immutable snapshot was requested.
    #[error("digit {requested} is not available (snapshot holds {available} digits)")]
    DigitUnavailable { requested: u64, available: u64 },

    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition on sizes or grids was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Invalid or incomplete configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An index or length beyond what a ladder can decide.
    #[error("range error: {0}")]
    Range(String),

    /// A kernel produced a non-finite value on sample indices `(i, j)`.
    #[error("kernel value {value} is not finite at pair ({i}, {j})")]
    NonFiniteIndex { i: usize, j: usize, value: f64 },

    /// A kernel produced a non-finite value on the points `(x, y)`.
    #[error("kernel value {value} is not finite at points ({x}, {y})")]
    NonFinitePoint { x: f64, y: f64, value: f64 },

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
