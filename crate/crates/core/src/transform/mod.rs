//! Model transformations: flattening, lowering to Classic DEVS, and the
//! equivalence check used to validate them.

pub mod equivalence;
pub mod flatten;
pub mod lower;

pub use equivalence::{trace_equivalent, Divergence, Equivalence, Projection, TIME_TOLERANCE};
pub use flatten::{flatten, Flattened};
pub use lower::{lower, Lowered, LoweredMsg};
