use std::any::Any;
use std::fmt::Display;

use crate::error::SimError;
use crate::message::MessageTag;
use crate::model::{Atomic, BoxedAtomic};
use crate::sim::context::{opt_string, RunContext};
use crate::sim::processor::Processor;
use crate::sim::trace::EventKind;
use crate::time::SimTime;

pub(crate) struct Simulator<M, U, V> {
    path: String,
    model: BoxedAtomic<M, U, V>,
    tl: SimTime,
    tn: SimTime,
}

impl<M, U, V> Simulator<M, U, V> {
    pub(crate) fn new(model: BoxedAtomic<M, U, V>, path: String) -> Self {
        Simulator { path, model, tl: SimTime::ZERO, tn: SimTime::INFINITY }
    }

    fn bad_sync(&self, tag: MessageTag, t: SimTime) -> SimError {
        SimError::BadSynchronization { path: self.path.clone(), tag, time: t, tl: self.tl, tn: self.tn }
    }

    fn model_err(&self, e: crate::error::ModelError) -> SimError {
        SimError::Model { path: self.path.clone(), source: e }
    }
}

impl<M, U, V> Processor<M, U, V> for Simulator<M, U, V>
where
    M: Display + Send + 'static,
    U: Display + Send + 'static,
    V: Send + 'static,
{
    fn path(&self) -> &str {
        &self.path
    }

    fn init(&mut self, t0: SimTime, ctx: &mut RunContext) -> Result<(), SimError> {
        self.tl = t0;
        self.tn = t0 + self.model.time_advance();
        if ctx.tracing() {
            let state = self.model.describe();
            ctx.record(t0, &self.path, EventKind::Init, state, String::new(), String::new(), String::new())?;
        }
        Ok(())
    }

    fn last_time(&self) -> SimTime {
        self.tl
    }

    fn next_time(&self) -> SimTime {
        self.tn
    }

    fn star(
        &mut self,
        t: SimTime,
        view: Option<&V>,
        ctx: &mut RunContext,
    ) -> Result<(Option<M>, Option<U>), SimError> {
        if t != self.tn {
            return Err(self.bad_sync(MessageTag::Star, t));
        }
        ctx.guard.check(&self.path, t)?;
        let y = self.model.output();
        if ctx.tracing() {
            ctx.record(t, &self.path, EventKind::Output, String::new(), opt_string(y.as_ref()), String::new(), String::new())?;
        }
        let up = self.model.internal(view).map_err(|e| self.model_err(e))?;
        self.tl = t;
        self.tn = t + self.model.time_advance();
        if ctx.tracing() {
            let state = self.model.describe();
            ctx.record(t, &self.path, EventKind::Internal, state, String::new(), opt_string(up.as_ref()), String::new())?;
        }
        Ok((y, up))
    }

    fn deliver(
        &mut self,
        x: &M,
        t: SimTime,
        view: Option<&V>,
        ctx: &mut RunContext,
    ) -> Result<Option<U>, SimError> {
        if t < self.tl || t > self.tn {
            return Err(self.bad_sync(MessageTag::X, t));
        }
        let e = t - self.tl;
        let up = self.model.external(e, x, view).map_err(|e| self.model_err(e))?;
        self.tl = t;
        self.tn = t + self.model.time_advance();
        if ctx.tracing() {
            let state = self.model.describe();
            ctx.record(t, &self.path, EventKind::External, state, String::new(), opt_string(up.as_ref()), String::new())?;
        }
        Ok(up)
    }

    fn observe(&self, out: &mut Vec<(String, String)>) {
        self.model.observe(&self.path, out);
    }

    fn global_any(&self) -> Option<&dyn Any> {
        self.model.global_any()
    }
}
