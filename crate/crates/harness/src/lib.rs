//! Experiment harness for the `ebdevs` case studies: JSON configuration,
//! replicated runs on independent random streams, aggregation onto a
//! common sampling grid, and transform/equivalence checks.

pub mod aggregate;
pub mod config;
pub mod experiment;
pub mod gallery;
pub mod output;
pub mod verify;

use ebdevs::{KernelError, SimError, TransformError};
use ebdevs_models::ParamError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("config file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Csv(#[from] csv::Error),
    #[error("{failed} of {total} replications aborted")]
    Aborted { failed: usize, total: usize },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl HarnessError {
    /// Process exit code: 1 config or I/O, 2 run abort, 3 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Aborted { .. } => 2,
            HarnessError::Sim(e) if e.is_run_abort() => 2,
            HarnessError::Verification(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
