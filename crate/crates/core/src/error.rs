use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid game parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("state ({x},{y}) is outside the state space 0..={c} x 0..={s}")]
    OutOfBounds { x: usize, y: usize, c: usize, s: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{context}: matrix is numerically singular (relative pivot {pivot:e})")]
    Singular { context: String, pivot: f64 },

    #[error("{context}: chain is effectively non-absorbing")]
    NonAbsorbing { context: String },

    #[error("chain is not irreducible: {0}")]
    Reducible(String),

    #[error("chain is periodic with period {0}")]
    Periodic(usize),

    #[error("{0}")]
    Domain(String),

    #[error("{}", schema_message(.column, .line, .message))]
    Schema { column: Option<String>, line: Option<u64>, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

fn schema_message(column: &Option<String>, line: &Option<u64>, message: &str) -> String {
    let mut out = String::from("schema error");
    if let Some(line) = line {
        out.push_str(&format!(" at line {line}"));
    }
    if let Some(column) = column {
        out.push_str(&format!(" in column '{column}'"));
    }
    format!("{out}: {message}")
}

impl Error {
    pub(crate) fn schema(column: Option<&str>, line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Schema { column: column.map(str::to_string), line, message: message.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
