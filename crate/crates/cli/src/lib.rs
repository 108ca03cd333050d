//! Library surface of the command-line tool (configuration schema and
//! subcommand implementations), split out so integration tests can exercise
//! the file formats directly.

pub mod commands;
pub mod config;

/// User-facing vs internal failure; decides the exit code (1 vs 2).
#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl From<seisfrag_core::Error> for CliError {
    fn from(e: seisfrag_core::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(format!("csv error: {e}"))
    }
}
