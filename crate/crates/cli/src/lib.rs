//! Batch front end: JSON-configured synthetic experiments, PGM frames,
//! convergence histories and run comparison.

pub mod compare;
pub mod config;
pub mod pgm;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(mmgks::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Format(String),
}

impl CliError {
    /// 2 for configuration problems, 1 for everything that fails after setup.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
