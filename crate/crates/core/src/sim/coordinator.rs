use std::any::Any;
use std::sync::Arc;

use crate::error::SimError;
use crate::ids::{Endpoint, ModelId};
use crate::message::MessageTag;
use crate::model::{BoxedGlobal, Component, Coupled, Couplings, Payload};
use crate::select::Select;
use crate::sim::context::{opt_string, RunContext};
use crate::sim::processor::Processor;
use crate::sim::schedule::EventList;
use crate::sim::simulator::Simulator;
use crate::sim::trace::EventKind;
use crate::time::SimTime;

/// Processor for a coupled model. `U`/`V` are the channels to its children,
/// `GU`/`GV` the channels to its parent.
pub(crate) struct Coordinator<M, U, V, GU, GV> {
    path: String,
    ids: Vec<ModelId>,
    children: Vec<Box<dyn Processor<M, U, V>>>,
    events: EventList,
    couplings: Arc<dyn Couplings<M>>,
    select: Select,
    global: Option<BoxedGlobal<U, V, GU, GV>>,
    invoke_on_empty_bag: bool,
    bag: Vec<(ModelId, U)>,
    route_buf: Vec<(Endpoint, M)>,
    tl: SimTime,
    tn: SimTime,
    /// Time of the last `δ_G` (or of initialization).
    t_global: SimTime,
}

impl<M, U, V, GU, GV> Coordinator<M, U, V, GU, GV>
where
    M: Payload + Sync,
    U: Payload,
    V: Send + 'static,
    GU: Payload,
    GV: Send + 'static,
{
    pub(crate) fn new(mut model: Coupled<M, U, V, GU, GV>, path: String) -> Self {
        model.sorted_components();
        let n = model.components.len();
        let mut ids = Vec::with_capacity(n);
        let mut children: Vec<Box<dyn Processor<M, U, V>>> = Vec::with_capacity(n);
        for (id, c) in model.components {
            let child_path = format!("{path}/{id}");
            ids.push(id);
            children.push(match c {
                Component::Atomic(a) => Box::new(Simulator::new(a, child_path)),
                Component::Coupled(cn) => cn.into_processor(child_path),
            });
        }
        Coordinator {
            path,
            ids,
            children,
            events: EventList::new(n),
            couplings: model.couplings,
            select: model.select,
            global: model.global,
            invoke_on_empty_bag: model.invoke_on_empty_bag,
            bag: Vec::new(),
            route_buf: Vec::new(),
            tl: SimTime::ZERO,
            tn: SimTime::INFINITY,
            t_global: SimTime::ZERO,
        }
    }

    fn index_of(&self, id: ModelId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    fn imminent(&self) -> Result<usize, SimError> {
        if self.select.is_lowest_id() {
            return Ok(self.events.first().expect("non-empty coupled model"));
        }
        let tied = self.events.tied();
        let tied_ids: Vec<ModelId> = tied.iter().map(|&i| self.ids[i]).collect();
        let chosen = self.select.choose(&tied_ids)?;
        Ok(self.index_of(chosen).expect("select returns a member"))
    }

    fn view_for(&self, id: ModelId) -> Option<V> {
        self.global.as_ref().and_then(|g| g.view(id))
    }

    fn reschedule(&mut self, idx: usize) {
        let tn = self.children[idx].next_time();
        self.events.set(idx, tn);
    }

    fn collect(&mut self, id: ModelId, up: Option<U>) {
        if let (Some(up), Some(_)) = (up, &self.global) {
            self.bag.push((id, up));
        }
    }

    /// Routes `msg` from `from` to its influencees. Returns the part destined
    /// for the parent, if any.
    fn dispatch(&mut self, from: Endpoint, msg: &M, t: SimTime, ctx: &mut RunContext) -> Result<Option<M>, SimError> {
        let mut buf = std::mem::take(&mut self.route_buf);
        buf.clear();
        self.couplings.route(from, msg, &mut buf);
        let mut out = None;
        for (dest, m) in buf.drain(..) {
            match dest {
                Endpoint::Parent => out = Some(m),
                Endpoint::Child(j) => {
                    let jdx = self.index_of(j).ok_or_else(|| {
                        SimError::Kernel(crate::error::KernelError::Usage(format!(
                            "{}: coupling to unknown component {j}",
                            self.path
                        )))
                    })?;
                    let view = self.view_for(j);
                    let up = self.children[jdx].deliver(&m, t, view.as_ref(), ctx)?;
                    self.reschedule(jdx);
                    self.collect(j, up);
                }
            }
        }
        self.route_buf = buf;
        Ok(out)
    }

    fn run_global(&mut self, t: SimTime, parent: Option<&GV>, ctx: &mut RunContext) -> Result<Option<GU>, SimError> {
        let Some(global) = self.global.as_mut() else {
            return Ok(None);
        };
        if self.bag.is_empty() && !self.invoke_on_empty_bag {
            return Ok(None);
        }
        self.bag.sort_by_key(|(id, _)| *id);
        let e_g = t - self.t_global;
        let up = global
            .transition(e_g, &self.bag, parent)
            .map_err(|e| SimError::Model { path: self.path.clone(), source: e })?;
        self.bag.clear();
        self.t_global = t;
        if ctx.tracing() {
            let s_g = global.describe();
            ctx.record(t, &self.path, EventKind::Global, String::new(), String::new(), opt_string(up.as_ref()), s_g)?;
        }
        Ok(up)
    }
}

impl<M, U, V, GU, GV> Processor<M, GU, GV> for Coordinator<M, U, V, GU, GV>
where
    M: Payload + Sync,
    U: Payload,
    V: Send + 'static,
    GU: Payload,
    GV: Send + 'static,
{
    fn path(&self) -> &str {
        &self.path
    }

    fn init(&mut self, t0: SimTime, ctx: &mut RunContext) -> Result<(), SimError> {
        let mut tl = t0;
        for idx in 0..self.children.len() {
            self.children[idx].init(t0, ctx)?;
            tl = tl.max(self.children[idx].last_time());
            self.reschedule(idx);
        }
        self.tl = tl;
        self.tn = self.events.min();
        self.t_global = t0;
        self.bag.clear();
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
        parent_view: Option<&GV>,
        ctx: &mut RunContext,
    ) -> Result<(Option<M>, Option<GU>), SimError> {
        if t != self.tn {
            return Err(SimError::BadSynchronization {
                path: self.path.clone(),
                tag: MessageTag::Star,
                time: t,
                tl: self.tl,
                tn: self.tn,
            });
        }
        let idx = self.imminent()?;
        let id = self.ids[idx];
        let view = self.view_for(id);
        let (y, up) = self.children[idx].star(t, view.as_ref(), ctx)?;
        self.reschedule(idx);
        self.collect(id, up);
        let out = match y {
            Some(y) => self.dispatch(Endpoint::Child(id), &y, t, ctx)?,
            None => None,
        };
        let gup = self.run_global(t, parent_view, ctx)?;
        self.tl = t;
        self.tn = self.events.min();
        Ok((out, gup))
    }

    fn deliver(
        &mut self,
        x: &M,
        t: SimTime,
        _parent_view: Option<&GV>,
        ctx: &mut RunContext,
    ) -> Result<Option<GU>, SimError> {
        if t < self.tl || t > self.tn {
            return Err(SimError::BadSynchronization {
                path: self.path.clone(),
                tag: MessageTag::X,
                time: t,
                tl: self.tl,
                tn: self.tn,
            });
        }
        // input-to-output couplings are rejected by validation, so nothing
        // can come back out here
        self.dispatch(Endpoint::Parent, x, t, ctx)?;
        self.tl = t;
        self.tn = self.events.min();
        Ok(None)
    }

    fn observe(&self, out: &mut Vec<(String, String)>) {
        for child in &self.children {
            child.observe(out);
        }
        if let Some(g) = &self.global {
            out.push((format!("{}#global", self.path), g.describe()));
        }
    }

    fn global_any(&self) -> Option<&dyn Any> {
        self.global.as_ref().map(|g| g.as_any())
    }
}
