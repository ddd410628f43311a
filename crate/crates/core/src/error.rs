use thiserror::Error;

/// Errors raised by the library.
///
/// The CLI maps `Usage` to exit code 1 and every other variant to exit code 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("capability exceeded: {0}")]
    Capability(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
