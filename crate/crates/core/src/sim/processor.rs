use std::any::Any;

use crate::error::SimError;
use crate::sim::context::RunContext;
use crate::time::SimTime;

/// A node of the processor tree: a simulator for an atomic model or a
/// coordinator for a coupled one. `U`/`V` are the channels to the parent.
pub trait Processor<M, U, V>: Send {
    fn path(&self) -> &str;

    /// Initialization message.
    fn init(&mut self, t0: SimTime, ctx: &mut RunContext) -> Result<(), SimError>;

    fn last_time(&self) -> SimTime;

    fn next_time(&self) -> SimTime;

    /// Star message. Returns the output towards the parent (already
    /// translated) and the up-message for the parent's bag.
    fn star(
        &mut self,
        t: SimTime,
        view: Option<&V>,
        ctx: &mut RunContext,
    ) -> Result<(Option<M>, Option<U>), SimError>;

    /// X message. Returns an up-message for the parent's bag.
    fn deliver(
        &mut self,
        x: &M,
        t: SimTime,
        view: Option<&V>,
        ctx: &mut RunContext,
    ) -> Result<Option<U>, SimError>;

    /// Leaf states as `(path, state)` pairs, plus `path#global` entries for
    /// coordinators that carry a global state.
    fn observe(&self, out: &mut Vec<(String, String)>);

    fn global_any(&self) -> Option<&dyn Any>;
}
