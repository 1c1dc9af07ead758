use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instance too small: {k} active split nodes, need at least {min}")]
    TooSmall { k: usize, min: usize },
    #[error("oracle cap exceeded: size {size} > cap {cap}")]
    OverCap { size: usize, cap: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Internal(msg.into()))
}
