//! Command-line front end: config parsing and the `simulate`, `estimate`,
//! `bound` and `check-invariants` subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod json;

pub use commands::Output;
pub use config::{CliConfig, Resolved};
pub use error::CliError;

/// Environment variable that overrides the config's `seed`.
pub const SEED_ENV: &str = "HKC_SEED";

pub fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={s:?} is not an unsigned 64-bit integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("{SEED_ENV}: {e}"))),
    }
}
