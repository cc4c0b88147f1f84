//! Experiment plumbing around `liyau-core`: the JSON configuration, the
//! pipelines behind each command, report files and parameter sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] liyau_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

impl HarnessError {
    /// Solver fidelity and positivity failures are violations; everything
    /// else means the run could not be set up.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(liyau_core::Error::Fidelity(_) | liyau_core::Error::Positivity(_)) => EXIT_VIOLATION,
            _ => EXIT_CONFIG,
        }
    }
}
