//! The abstract simulator: simulators, coordinators and the root loop.

pub(crate) mod context;
pub(crate) mod coordinator;
pub mod processor;
pub(crate) mod root;
pub(crate) mod schedule;
pub(crate) mod simulator;
pub mod trace;

pub use context::{RunContext, DEFAULT_LEGITIMACY_BUDGET};
pub use processor::Processor;
pub use root::Simulation;
pub use trace::{write_trace_csv, EventKind, Observation, TraceRecord, TRACE_HEADER};
