use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("arm index {index} out of range for {arms} arms")]
    Index { index: usize, arms: usize },

    #[error("invalid prior: {0}")]
    Prior(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("probability {0} outside the open interval (0, 1)")]
    Domain(f64),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_arm(index: usize, arms: usize) -> Result<()> {
    if index < arms {
        Ok(())
    } else {
        Err(Error::Index { index, arms })
    }
}
