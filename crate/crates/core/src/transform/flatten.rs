//! Closure under coupling: a coupled model seen as one atomic model.

use std::any::Any;
use std::sync::Arc;

use crate::error::ModelError;
use crate::ids::{Endpoint, ModelId};
use crate::model::{Atomic, BoxedAtomic, BoxedGlobal, Component, Coupled, Couplings, Payload};
use crate::select::Select;
use crate::sim::schedule::EventList;
use crate::time::SimTime;

/// Atomic model equivalent to a coupled model.
///
/// The composite state holds every child's state with its absolute last and
/// next event times (from which `e_d` and `σ_d` follow), the global state and
/// the time of the last `δ_G`. Nested coupled children are flattened first.
pub struct Flattened<M, U, V, GU, GV> {
    name: String,
    ids: Vec<ModelId>,
    children: Vec<BoxedAtomic<M, U, V>>,
    tl: Vec<SimTime>,
    events: EventList,
    now: SimTime,
    t_global: SimTime,
    couplings: Arc<dyn Couplings<M>>,
    select: Select,
    global: Option<BoxedGlobal<U, V, GU, GV>>,
    invoke_on_empty_bag: bool,
    bag: Vec<(ModelId, U)>,
}

/// Flattens a coupled model (recursively) into an atomic model.
pub fn flatten<M, U, V, GU, GV>(model: Coupled<M, U, V, GU, GV>) -> Flattened<M, U, V, GU, GV>
where
    M: Payload + Sync,
    U: Payload,
    V: Send + 'static,
    GU: Payload,
    GV: Send + 'static,
{
    Flattened::new(model)
}

impl<M, U, V, GU, GV> Flattened<M, U, V, GU, GV>
where
    M: Payload + Sync,
    U: Payload,
    V: Send + 'static,
    GU: Payload,
    GV: Send + 'static,
{
    pub fn new(mut model: Coupled<M, U, V, GU, GV>) -> Self {
        model.sorted_components();
        let n = model.components.len();
        let mut ids = Vec::with_capacity(n);
        let mut children: Vec<BoxedAtomic<M, U, V>> = Vec::with_capacity(n);
        for (id, c) in model.components {
            ids.push(id);
            children.push(match c {
                Component::Atomic(a) => a,
                Component::Coupled(cn) => cn.flatten_boxed(),
            });
        }
        let mut events = EventList::new(n);
        for (idx, c) in children.iter().enumerate() {
            events.set(idx, SimTime::ZERO + c.time_advance());
        }
        Flattened {
            name: model.name,
            ids,
            children,
            tl: vec![SimTime::ZERO; n],
            events,
            now: SimTime::ZERO,
            t_global: SimTime::ZERO,
            couplings: model.couplings,
            select: model.select,
            global: model.global,
            invoke_on_empty_bag: model.invoke_on_empty_bag,
            bag: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn imminent(&self) -> usize {
        if self.select.is_lowest_id() {
            return self.events.first().expect("non-empty coupled model");
        }
        let tied: Vec<ModelId> = self.events.tied().iter().map(|&i| self.ids[i]).collect();
        let chosen = self.select.choose(&tied).expect("validated select");
        self.ids.binary_search(&chosen).expect("member of D")
    }

    fn view_for(&self, id: ModelId) -> Option<V> {
        self.global.as_ref().and_then(|g| g.view(id))
    }

    fn collect(&mut self, id: ModelId, up: Option<U>) {
        if let (Some(up), Some(_)) = (up, &self.global) {
            self.bag.push((id, up));
        }
    }

    /// Applies `δ_ext` to every receiver of `msg`, at time `self.now`.
    fn propagate(&mut self, from: Endpoint, msg: &M) -> Result<(), ModelError> {
        let mut routed = Vec::new();
        self.couplings.route(from, msg, &mut routed);
        let t = self.now;
        for (dest, m) in routed {
            if let Endpoint::Child(j) = dest {
                let jdx = self
                    .ids
                    .binary_search(&j)
                    .map_err(|_| ModelError::Invariant(format!("coupling to unknown component {j}")))?;
                let view = self.view_for(j);
                let e = t - self.tl[jdx];
                let up = self.children[jdx].external(e, &m, view.as_ref())?;
                self.tl[jdx] = t;
                self.events.set(jdx, t + self.children[jdx].time_advance());
                self.collect(j, up);
            }
        }
        Ok(())
    }

    fn global_step(&mut self, parent: Option<&GV>) -> Result<Option<GU>, ModelError> {
        let Some(global) = self.global.as_mut() else {
            return Ok(None);
        };
        if self.bag.is_empty() && !self.invoke_on_empty_bag {
            return Ok(None);
        }
        self.bag.sort_by_key(|(id, _)| *id);
        let up = global.transition(self.now - self.t_global, &self.bag, parent)?;
        self.bag.clear();
        self.t_global = self.now;
        Ok(up)
    }
}

impl<M, U, V, GU, GV> Atomic for Flattened<M, U, V, GU, GV>
where
    M: Payload + Sync,
    U: Payload,
    V: Send + 'static,
    GU: Payload,
    GV: Send + 'static,
{
    type Message = M;
    type Up = GU;
    type View = GV;

    fn time_advance(&self) -> SimTime {
        self.events.min() - self.now
    }

    fn output(&self) -> Option<M> {
        let idx = self.imminent();
        let y = self.children[idx].output()?;
        let mut routed = Vec::new();
        self.couplings.route(Endpoint::Child(self.ids[idx]), &y, &mut routed);
        routed.into_iter().find(|(d, _)| *d == Endpoint::Parent).map(|(_, m)| m)
    }

    fn internal(&mut self, view: Option<&GV>) -> Result<Option<GU>, ModelError> {
        // re-anchor on the exact child time rather than now + ta
        let t = self.events.min();
        self.now = t;
        let idx = self.imminent();
        let id = self.ids[idx];
        let child_view = self.view_for(id);
        let y = self.children[idx].output();
        let up = self.children[idx].internal(child_view.as_ref())?;
        self.tl[idx] = t;
        self.events.set(idx, t + self.children[idx].time_advance());
        self.collect(id, up);
        if let Some(y) = y {
            self.propagate(Endpoint::Child(id), &y)?;
        }
        self.global_step(view)
    }

    fn external(&mut self, elapsed: SimTime, input: &M, view: Option<&GV>) -> Result<Option<GU>, ModelError> {
        self.now = self.now + elapsed;
        self.propagate(Endpoint::Parent, input)?;
        self.global_step(view)
    }

    fn describe(&self) -> String {
        let mut parts: Vec<String> = self
            .ids
            .iter()
            .zip(&self.children)
            .map(|(id, c)| format!("{id}={}", c.describe()))
            .collect();
        if let Some(g) = &self.global {
            parts.push(format!("G={}", g.describe()));
        }
        parts.join(";")
    }

    fn observe(&self, path: &str, out: &mut Vec<(String, String)>) {
        for (id, c) in self.ids.iter().zip(&self.children) {
            c.observe(&format!("{path}/{id}"), out);
        }
        if let Some(g) = &self.global {
            out.push((format!("{path}#global"), g.describe()));
        }
    }

    fn global_any(&self) -> Option<&dyn Any> {
        self.global.as_ref().map(|g| g.as_any())
    }
}
