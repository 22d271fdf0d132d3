//! Case-study models for the `ebdevs` kernel.
//!
//! - [`sir`]: SIR epidemic on a configuration-model network, with an optional
//!   vaccination rule driven by the macro-level infection growth rate.
//! - [`boids`]: flocking on a torus with a global neighbor index.
//! - [`mito`]: mitochondrial fusion/fission in a 2-D cell.

pub mod boids;
pub mod mito;
pub mod sir;

use ebdevs::{KernelError, ModelError};

#[derive(Debug, thiserror::Error)]
pub enum ParamError {
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("initial state: {0}")]
    Init(#[from] ModelError),
}

pub(crate) fn check(ok: bool, name: &'static str, reason: impl Into<String>) -> Result<(), ParamError> {
    if ok {
        Ok(())
    } else {
        Err(ParamError::Invalid { name, reason: reason.into() })
    }
}

pub(crate) fn positive(value: f64, name: &'static str) -> Result<(), ParamError> {
    check(value > 0.0 && value.is_finite(), name, format!("must be positive and finite, got {value}"))
}
