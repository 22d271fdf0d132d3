use std::any::Any;
use std::io::Write;

use crate::error::SimError;
use crate::message::Null;
use crate::model::{Atomic, Coupled, Payload};
use crate::sim::context::{opt_string, RunContext, DEFAULT_LEGITIMACY_BUDGET};
use crate::sim::coordinator::Coordinator;
use crate::sim::processor::Processor;
use crate::sim::simulator::Simulator;
use crate::sim::trace::{Observation, TraceRecord, TraceSink};
use crate::time::SimTime;

/// Root coordinator: owns the processor tree and drives star cycles.
pub struct Simulation<M> {
    root: Box<dyn Processor<M, Null, Null>>,
    ctx: RunContext,
    initialized: bool,
    observations: Option<Vec<Observation>>,
    cycles: u64,
}

impl<M: Payload + Sync> Simulation<M> {
    /// Builds the processor tree for a validated root coupled model.
    pub fn new<U, V>(model: Coupled<M, U, V, Null, Null>) -> Result<Self, SimError>
    where
        U: Payload,
        V: Send + 'static,
    {
        let report = model.validate();
        if !report.is_valid() {
            return Err(SimError::Invalid(report));
        }
        let path = model.name().to_string();
        Ok(Self::from_processor(Box::new(Coordinator::new(model, path))))
    }

    /// Runs a single atomic model at the root, e.g. a flattened coupled model.
    pub fn from_atomic<A>(path: impl Into<String>, model: A) -> Self
    where
        A: Atomic<Message = M, Up = Null, View = Null> + 'static,
    {
        Self::from_processor(Box::new(Simulator::new(Box::new(model), path.into())))
    }

    fn from_processor(root: Box<dyn Processor<M, Null, Null>>) -> Self {
        Simulation {
            root,
            ctx: RunContext::new(DEFAULT_LEGITIMACY_BUDGET),
            initialized: false,
            observations: None,
            cycles: 0,
        }
    }

    /// Maximum internal transitions allowed at a single time point.
    pub fn with_legitimacy_budget(mut self, budget: u64) -> Self {
        self.ctx.guard = crate::sim::context::LegitimacyGuard::new(budget);
        self
    }

    /// Keeps every trace record in memory.
    pub fn with_memory_trace(mut self) -> Self {
        self.ctx.trace = Some(TraceSink::Memory(Vec::new()));
        self
    }

    /// Streams trace records as CSV to `writer`.
    pub fn with_csv_trace(mut self, writer: Box<dyn Write + Send>) -> Result<Self, SimError> {
        self.ctx.trace = Some(TraceSink::csv(writer)?);
        Ok(self)
    }

    /// Records a leaf-state snapshot after initialization and after every root cycle.
    pub fn with_observations(mut self) -> Self {
        self.observations = Some(Vec::new());
        self
    }

    pub fn initialize(&mut self, t0: SimTime) -> Result<(), SimError> {
        self.root.init(t0, &mut self.ctx)?;
        self.initialized = true;
        self.cycles = 0;
        if self.observations.is_some() {
            self.snapshot(t0, None);
        }
        Ok(())
    }

    pub fn next_time(&self) -> SimTime {
        self.root.next_time()
    }

    pub fn last_time(&self) -> SimTime {
        self.root.last_time()
    }

    /// Number of root cycles performed since initialization.
    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    /// One root cycle. Returns its time, or `None` if the model is passive.
    pub fn step(&mut self) -> Result<Option<SimTime>, SimError> {
        if !self.initialized {
            return Err(SimError::NotInitialized);
        }
        let t = self.root.next_time();
        if t.is_infinite() {
            return Ok(None);
        }
        let (y, _) = self.root.star(t, None, &mut self.ctx)?;
        self.cycles += 1;
        if self.observations.is_some() {
            self.snapshot(t, Some(opt_string(y.as_ref())).filter(|s| !s.is_empty()));
        }
        Ok(Some(t))
    }

    /// Runs cycles while the next event time is at most `t_end`. With an
    /// infinite `t_end` this runs until the model becomes passive.
    pub fn run_until(&mut self, t_end: SimTime) -> Result<(), SimError> {
        while self.step_before(t_end)? {}
        self.flush_trace()
    }

    /// Runs to `t_end`, calling `sample` at `0, dt, 2dt, ...` after all events
    /// at or before each grid point (zero-order hold).
    pub fn run_sampled<F>(&mut self, t_end: SimTime, dt: SimTime, mut sample: F) -> Result<(), SimError>
    where
        F: FnMut(SimTime, &Self) -> Result<(), SimError>,
    {
        if dt <= SimTime::ZERO {
            return Err(crate::error::KernelError::NonPositive { what: "sample interval", value: dt.value() }.into());
        }
        let mut k: u64 = 0;
        loop {
            // grid points are computed by multiplication so they stay exact for unit steps
            let g = SimTime::new(dt.value() * k as f64)?;
            if g > t_end {
                break;
            }
            while self.step_before(g)? {}
            sample(g, self)?;
            k += 1;
        }
        self.flush_trace()
    }

    fn step_before(&mut self, t_end: SimTime) -> Result<bool, SimError> {
        let t = self.root.next_time();
        if t.is_infinite() || t > t_end {
            return Ok(false);
        }
        self.step()?;
        Ok(true)
    }

    fn snapshot(&mut self, t: SimTime, output: Option<String>) {
        let mut states = Vec::new();
        self.root.observe(&mut states);
        if let Some(obs) = &mut self.observations {
            obs.push(Observation { time: t, output, states });
        }
    }

    /// Current leaf states.
    pub fn observe(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.root.observe(&mut out);
        out
    }

    /// Root global state, if the root carries one of type `T`.
    pub fn global<T: Any>(&self) -> Option<&T> {
        self.root.global_any().and_then(|g| g.downcast_ref::<T>())
    }

    pub fn observations(&self) -> &[Observation] {
        self.observations.as_deref().unwrap_or(&[])
    }

    pub fn take_observations(&mut self) -> Vec<Observation> {
        self.observations.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// In-memory trace records (empty unless built with `with_memory_trace`).
    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        match &mut self.ctx.trace {
            Some(TraceSink::Memory(v)) => std::mem::take(v),
            _ => Vec::new(),
        }
    }

    pub fn flush_trace(&mut self) -> Result<(), SimError> {
        match &mut self.ctx.trace {
            Some(sink) => sink.flush(),
            None => Ok(()),
        }
    }
}
