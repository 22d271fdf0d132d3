use crate::error::SimError;
use crate::sim::trace::{EventKind, TraceRecord, TraceSink};
use crate::time::SimTime;

pub const DEFAULT_LEGITIMACY_BUDGET: u64 = 1_000_000;

/// Counts internal transitions that happen without the clock advancing.
#[derive(Debug, Clone)]
pub(crate) struct LegitimacyGuard {
    budget: u64,
    window: SimTime,
    count: u64,
}

impl LegitimacyGuard {
    pub(crate) fn new(budget: u64) -> Self {
        LegitimacyGuard { budget: budget.max(1), window: SimTime::ZERO, count: 0 }
    }

    /// Called before each internal transition. Fails instead of performing
    /// transition number `budget + 1` within one time point.
    pub(crate) fn check(&mut self, path: &str, t: SimTime) -> Result<(), SimError> {
        if t != self.window {
            self.window = t;
            self.count = 0;
        }
        if self.count >= self.budget {
            return Err(SimError::Legitimacy { path: path.to_string(), time: t, transitions: self.count });
        }
        self.count += 1;
        Ok(())
    }
}

/// Per-run mutable services handed down the processor tree.
pub struct RunContext {
    pub(crate) trace: Option<TraceSink>,
    pub(crate) guard: LegitimacyGuard,
}

impl RunContext {
    pub(crate) fn new(budget: u64) -> Self {
        RunContext { trace: None, guard: LegitimacyGuard::new(budget) }
    }

    pub(crate) fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn record(
        &mut self,
        time: SimTime,
        path: &str,
        kind: EventKind,
        state: String,
        output: String,
        y_up: String,
        s_g: String,
    ) -> Result<(), SimError> {
        match &mut self.trace {
            Some(sink) => sink.push(TraceRecord {
                time,
                model_path: path.to_string(),
                kind,
                state,
                output,
                y_up,
                s_g,
            }),
            None => Ok(()),
        }
    }
}

pub(crate) fn opt_string<T: std::fmt::Display>(v: Option<&T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
