use thiserror::Error;

use crate::ids::ModelId;
use crate::message::MessageTag;
use crate::time::SimTime;
use crate::validate::ValidationReport;

/// Misuse of a kernel primitive.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("invalid time value {0}: times must be nonnegative and not NaN")]
    InvalidTime(f64),
    #[error("{0}: input list is empty")]
    EmptyInput(&'static str),
    #[error("select returned {chosen}, which is not in the imminent set")]
    SelectNotMember { chosen: ModelId },
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{0}")]
    Usage(String),
}

/// Failure raised by model code (transition or global functions).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("capacity exhausted: {0}")]
    Capacity(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("bad synchronization at {path}: {tag}-message for t={time} outside [tl={tl}, tn={tn}]")]
    BadSynchronization {
        path: String,
        tag: MessageTag,
        time: SimTime,
        tl: SimTime,
        tn: SimTime,
    },
    #[error("legitimacy budget exhausted at {path}: {transitions} transitions at t={time} without time advancing")]
    Legitimacy {
        path: String,
        time: SimTime,
        transitions: u64,
    },
    #[error("model error at {path}: {source}")]
    Model {
        path: String,
        #[source]
        source: ModelError,
    },
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("trace output failed: {0}")]
    Trace(String),
    #[error("simulation used before initialize()")]
    NotInitialized,
}

impl SimError {
    /// True for aborts that are properties of the run rather than bugs:
    /// legitimacy and capacity.
    pub fn is_run_abort(&self) -> bool {
        matches!(
            self,
            SimError::Legitimacy { .. }
                | SimError::Model { source: ModelError::Capacity(_), .. }
        )
    }
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("component {path} is a coupled model; flatten it before lowering")]
    NotFlat { path: String },
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
}
