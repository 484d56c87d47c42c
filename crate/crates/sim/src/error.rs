use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid parameter: {0}")]
    Invalid(suprec_core::Error),
    #[error("{0}")]
    Runtime(suprec_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Thread(String),
}

impl From<suprec_core::Error> for Error {
    fn from(e: suprec_core::Error) -> Self {
        Error::Invalid(e)
    }
}

impl Error {
    /// Process exit code: 2 for bad input, 3 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Invalid(_) => 2,
            Error::Runtime(_) | Error::Io { .. } | Error::Thread(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
