//! Lowering to Classic DEVS: every child carries a replica of the global state
//! and up-messages travel over a fully connected broadcast mesh.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::error::{ModelError, TransformError};
use crate::ids::{Endpoint, ModelId, PortRef};
use crate::message::Null;
use crate::model::{Atomic, BoxedAtomic, BoxedGlobal, Component, Coupled, Couplings, Payload};
use crate::time::SimTime;

/// Messages of a lowered model: original messages on regular ports, and
/// up-messages re-broadcast on `bOPort` -> `bIPort`.
#[derive(Clone, Debug, PartialEq)]
pub enum LoweredMsg<M, U> {
    Regular(M),
    Broadcast { from: ModelId, up: U },
}

impl<M, U> LoweredMsg<M, U> {
    pub fn port(&self) -> PortRef {
        match self {
            LoweredMsg::Regular(_) => PortRef::OUT,
            LoweredMsg::Broadcast { .. } => PortRef::B_OUT,
        }
    }
}

impl<M: fmt::Display, U: fmt::Display> fmt::Display for LoweredMsg<M, U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoweredMsg::Regular(m) => write!(f, "{m}"),
            LoweredMsg::Broadcast { from, up } => write!(f, "{}[{from}]:{up}", PortRef::B_OUT),
        }
    }
}

/// Lowered atomic. The lumped state is the wrapped model, its pending
/// up-messages (broadcast flag = non-empty queue), and the local replica of
/// the global state.
pub struct Lowered<M, U, V> {
    id: ModelId,
    inner: BoxedAtomic<M, U, V>,
    replica: Option<BoxedGlobal<U, V, Null, Null>>,
    pending: VecDeque<U>,
    /// Remaining time until the wrapped model's next internal transition.
    sigma: SimTime,
    elapsed_inner: SimTime,
    elapsed_replica: SimTime,
}

impl<M, U: Clone, V> Lowered<M, U, V> {
    fn new(id: ModelId, inner: BoxedAtomic<M, U, V>, replica: Option<BoxedGlobal<U, V, Null, Null>>) -> Self {
        let sigma = inner.time_advance();
        Lowered {
            id,
            inner,
            replica,
            pending: VecDeque::new(),
            sigma,
            elapsed_inner: SimTime::ZERO,
            elapsed_replica: SimTime::ZERO,
        }
    }

    pub fn broadcasting(&self) -> bool {
        !self.pending.is_empty()
    }

    fn view(&self) -> Option<V> {
        self.replica.as_ref().and_then(|r| r.view(self.id))
    }

    /// Applies an own up-message to the local replica and queues it for the mesh.
    fn publish(&mut self, up: Option<U>) -> Result<(), ModelError> {
        let (Some(up), Some(replica)) = (up, self.replica.as_mut()) else {
            return Ok(());
        };
        replica.transition(self.elapsed_replica, &[(self.id, up.clone())], None)?;
        self.elapsed_replica = SimTime::ZERO;
        self.pending.push_back(up);
        Ok(())
    }
}

impl<M, U, V> Atomic for Lowered<M, U, V>
where
    M: Payload,
    U: Payload,
    V: Send + 'static,
{
    type Message = LoweredMsg<M, U>;
    type Up = Null;
    type View = Null;

    fn time_advance(&self) -> SimTime {
        if self.broadcasting() {
            SimTime::ZERO
        } else {
            self.sigma
        }
    }

    fn output(&self) -> Option<LoweredMsg<M, U>> {
        match self.pending.front() {
            Some(up) => Some(LoweredMsg::Broadcast { from: self.id, up: up.clone() }),
            None => self.inner.output().map(LoweredMsg::Regular),
        }
    }

    fn internal(&mut self, _view: Option<&Null>) -> Result<Option<Null>, ModelError> {
        if self.pending.pop_front().is_some() {
            return Ok(None);
        }
        let view = self.view();
        let up = self.inner.internal(view.as_ref())?;
        self.elapsed_inner = SimTime::ZERO;
        self.elapsed_replica = self.elapsed_replica + self.sigma;
        self.sigma = self.inner.time_advance();
        self.publish(up)?;
        Ok(None)
    }

    fn external(
        &mut self,
        elapsed: SimTime,
        input: &LoweredMsg<M, U>,
        _view: Option<&Null>,
    ) -> Result<Option<Null>, ModelError> {
        self.sigma = self.sigma - elapsed;
        self.elapsed_inner = self.elapsed_inner + elapsed;
        self.elapsed_replica = self.elapsed_replica + elapsed;
        match input {
            LoweredMsg::Broadcast { from, up } => {
                if let Some(replica) = self.replica.as_mut() {
                    replica.transition(self.elapsed_replica, &[(*from, up.clone())], None)?;
                    self.elapsed_replica = SimTime::ZERO;
                }
            }
            LoweredMsg::Regular(m) => {
                let view = self.view();
                let up = self.inner.external(self.elapsed_inner, m, view.as_ref())?;
                self.elapsed_inner = SimTime::ZERO;
                self.sigma = self.inner.time_advance();
                self.publish(up)?;
            }
        }
        Ok(None)
    }

    fn describe(&self) -> String {
        format!("{}|b={}", self.inner.describe(), self.pending.len())
    }

    fn observe(&self, path: &str, out: &mut Vec<(String, String)>) {
        self.inner.observe(path, out);
        if let Some(r) = &self.replica {
            out.push((format!("{path}#replica"), r.describe()));
        }
        out.push((format!("{path}#broadcast"), self.pending.len().to_string()));
    }
}

/// Original couplings on regular ports plus the broadcast mesh.
struct MeshCouplings<M> {
    inner: Arc<dyn Couplings<M>>,
    ids: Vec<ModelId>,
    mesh: bool,
}

impl<M, U> Couplings<LoweredMsg<M, U>> for MeshCouplings<M>
where
    M: Clone + Send + Sync,
    U: Clone + Send + Sync,
{
    fn links(&self) -> Vec<(Endpoint, Endpoint)> {
        let mut links = self.inner.links();
        if self.mesh {
            for &i in &self.ids {
                for &j in &self.ids {
                    if i != j {
                        links.push((Endpoint::Child(i), Endpoint::Child(j)));
                    }
                }
            }
        }
        links
    }

    fn route(&self, from: Endpoint, msg: &LoweredMsg<M, U>, out: &mut Vec<(Endpoint, LoweredMsg<M, U>)>) {
        match msg {
            LoweredMsg::Regular(m) => {
                let mut routed = Vec::new();
                self.inner.route(from, m, &mut routed);
                out.extend(routed.into_iter().map(|(d, m)| (d, LoweredMsg::Regular(m))));
            }
            LoweredMsg::Broadcast { .. } => {
                if !self.mesh {
                    return;
                }
                for &j in &self.ids {
                    if Endpoint::Child(j) != from {
                        out.push((Endpoint::Child(j), msg.clone()));
                    }
                }
            }
        }
    }
}

/// Lowers a root coupled model with atomic children to a Classic DEVS coupled
/// model. Hierarchies must be flattened first.
pub fn lower<M, U, V>(
    mut model: Coupled<M, U, V, Null, Null>,
) -> Result<Coupled<LoweredMsg<M, U>, Null, Null>, TransformError>
where
    M: Payload + Sync,
    U: Payload + Sync,
    V: Send + 'static,
{
    let report = model.validate();
    if !report.is_valid() {
        return Err(TransformError::Invalid(report));
    }
    if let Some((id, _)) = model.components.iter().find(|(_, c)| matches!(c, Component::Coupled(_))) {
        return Err(TransformError::NotFlat { path: format!("{}/{id}", model.name) });
    }
    model.sorted_components();
    let ids: Vec<ModelId> = model.components.iter().map(|(id, _)| *id).collect();
    let global = model.global.take();
    let mesh = MeshCouplings { inner: model.couplings.clone(), ids: ids.clone(), mesh: global.is_some() };
    let mut lowered: Coupled<LoweredMsg<M, U>, Null, Null> = Coupled::new(model.name.clone())
        .with_couplings(mesh)
        .with_select(model.select.clone());
    for (id, c) in model.components {
        let Component::Atomic(a) = c else { unreachable!("checked above") };
        let replica = global.as_ref().map(|g| g.box_clone());
        lowered.add_atomic(id, Lowered::new(id, a, replica));
    }
    Ok(lowered)
}
