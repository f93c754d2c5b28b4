//! Scenario files, the `minima` / `run` / `sweep` commands and their exit codes.

mod commands;
mod config;

pub use commands::{cmd_minima, cmd_run, cmd_sweep, write_minima, InversionMinimum, RunSummary, SweepPoint, SWEEP_AXES};
pub use config::{Nonlinearity, Observable, ScenarioConfig, KEYS};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Engine(#[from] Error),
}

impl CliError {
    /// 0 success, 2 config validation, 3 projection floor, 4 truncation margin,
    /// 5 numerical failure (I/O problems included).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Engine(Error::InvalidParameters(_)) => 2,
            CliError::Engine(Error::UnmeasurableOutcome { .. }) => 3,
            CliError::Engine(Error::Truncation(_)) => 4,
            _ => 5,
        }
    }
}
