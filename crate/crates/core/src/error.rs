use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("constellation order {0} is not a power of two >= 2")]
    InvalidOrder(usize),

    #[error("expected {expected} bits, got {got}")]
    BitLength { expected: usize, got: usize },

    #[error("invalid scheme ({m1}, {m2}): {reason}")]
    InvalidScheme { m1: usize, m2: usize, reason: String },

    #[error("invalid cluster map: {0}")]
    InvalidMap(String),

    #[error("no builtin map library for scheme ({0}, {1}); use construct_library")]
    NoBuiltin(usize, usize),

    #[error("map construction infeasible: {0}")]
    Infeasible(String),

    #[error("fade state at the origin: {0}")]
    OriginSfs(String),

    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),

    #[error("distance metric needs a nonzero difference pair")]
    ZeroPair,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config { field: field.to_string(), message: message.into() }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), message: err.to_string() }
    }
}
