//! Discrete-event simulation kernel for DEVS models extended with
//! micro-macro channels: atomic models push up-messages into their parent's
//! bag, the parent folds them into a global state with `δ_G`, and exposes a
//! view of that state back to its children through `v_down`.
//!
//! Classic DEVS models are the special case where both channels are [`Null`].

pub mod classic;
pub mod error;
pub mod ids;
pub mod message;
pub mod model;
pub mod select;
pub mod sim;
pub mod stochastic;
pub mod time;
pub mod transform;
pub mod validate;

pub use classic::{classic_lift, ClassicAtomic, Lifted};
pub use error::{KernelError, ModelError, SimError, TransformError};
pub use ids::{Endpoint, ModelId, PortKind, PortRef};
pub use message::{KernelMessage, MessageTag, Null};
pub use model::{
    Atomic, BoxedAtomic, Component, Coupled, CouplingTable, Couplings, DynGlobal, GlobalState, Payload,
};
pub use select::{compare_then_tiebreak, Select};
pub use sim::{EventKind, Observation, Simulation, TraceRecord};
pub use time::{time_min, SimTime};
pub use validate::{ValidationReport, Violation};
