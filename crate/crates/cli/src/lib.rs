//! Experiment runner for bergtrace: configuration, drivers and reports.

pub mod config;
pub mod drivers;
pub mod report;
pub mod selftest;

pub use config::{Experiment, ExperimentConfig};
pub use drivers::run;
pub use report::{Row, VerificationReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    /// Process exit code: 2 for bad input, 3 for exhausted resources.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) | CliError::Io { .. } => 3,
            CliError::Compute(_) => 1,
        }
    }
}

impl From<bergtrace::Error> for CliError {
    fn from(e: bergtrace::Error) -> Self {
        match e {
            bergtrace::Error::Budget { .. } => CliError::Resource(e.to_string()),
            bergtrace::Error::Parse { .. } | bergtrace::Error::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}
