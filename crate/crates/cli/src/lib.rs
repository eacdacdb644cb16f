//! Batch front end: reads a TOML run configuration and produces JSON or CSV
//! documents for the `price`, `surface`, `verify` and `sweep` subcommands.

pub mod commands;
pub mod config;
pub mod sweep;

pub use commands::{price, surface, verify, Output};
pub use config::{Prepared, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<passport_core::Error> for CliError {
    fn from(e: passport_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}
