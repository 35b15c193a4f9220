use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config or arguments; `key` points at the offending JSON key.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] hkc_core::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config { key: key.into(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
