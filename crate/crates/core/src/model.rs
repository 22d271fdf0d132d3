//! Behavior contracts for atomic and coupled models.

use std::any::Any;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::ModelError;
use crate::ids::{Endpoint, ModelId};
use crate::message::Null;
use crate::select::Select;
use crate::sim::coordinator::Coordinator;
use crate::sim::processor::Processor;
use crate::time::SimTime;
use crate::transform::flatten::Flattened;
use crate::validate::ValidationReport;

/// Values that travel between models and end up in traces.
pub trait Payload: Clone + Send + fmt::Display + 'static {}
impl<T: Clone + Send + fmt::Display + 'static> Payload for T {}

/// An atomic model. The implementing value *is* the current state; the
/// transition functions mutate it in place.
///
/// `Message` is the union of the input and output sets, `Up` the set of
/// upward messages sent to the parent's bag, `View` the macro view the parent
/// exposes through `v_down`. Models without micro-macro channels use [`Null`].
pub trait Atomic: Send {
    type Message;
    type Up;
    type View;

    fn time_advance(&self) -> SimTime;

    fn internal(&mut self, view: Option<&Self::View>) -> Result<Option<Self::Up>, ModelError>;

    fn external(
        &mut self,
        elapsed: SimTime,
        input: &Self::Message,
        view: Option<&Self::View>,
    ) -> Result<Option<Self::Up>, ModelError>;

    /// Output function. Only consulted immediately before `internal`.
    fn output(&self) -> Option<Self::Message>;

    /// Serialized state for traces. Must be deterministic.
    fn describe(&self) -> String;

    /// Pushes `(path, state)` pairs for every leaf this model stands for.
    fn observe(&self, path: &str, out: &mut Vec<(String, String)>) {
        out.push((path.to_string(), self.describe()));
    }

    /// Global state of the coupled model this atomic was built from, if any.
    fn global_any(&self) -> Option<&dyn Any> {
        None
    }
}

pub type BoxedAtomic<M, U, V> = Box<dyn Atomic<Message = M, Up = U, View = V>>;

impl<M, U, V> Atomic for BoxedAtomic<M, U, V> {
    type Message = M;
    type Up = U;
    type View = V;

    fn time_advance(&self) -> SimTime {
        (**self).time_advance()
    }
    fn internal(&mut self, view: Option<&V>) -> Result<Option<U>, ModelError> {
        (**self).internal(view)
    }
    fn external(&mut self, elapsed: SimTime, input: &M, view: Option<&V>) -> Result<Option<U>, ModelError> {
        (**self).external(elapsed, input, view)
    }
    fn output(&self) -> Option<M> {
        (**self).output()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn observe(&self, path: &str, out: &mut Vec<(String, String)>) {
        (**self).observe(path, out)
    }
    fn global_any(&self) -> Option<&dyn Any> {
        (**self).global_any()
    }
}

/// Global (macro) state of a coupled model together with `v_down` and `δ_G`.
pub trait GlobalState: Clone + Send + 'static {
    /// Up-messages received from children.
    type Up;
    /// What `v_down` hands to children.
    type View;
    /// Up-message sent to this coupled model's own parent.
    type GlobalUp;
    /// Macro view received from this coupled model's own parent.
    type ParentView;

    /// `v_down`, evaluated for one requesting child.
    fn view(&self, child: ModelId) -> Option<Self::View>;

    /// `δ_G`. `bag` is sorted by sender id.
    fn transition(
        &mut self,
        elapsed: SimTime,
        bag: &[(ModelId, Self::Up)],
        parent: Option<&Self::ParentView>,
    ) -> Result<Option<Self::GlobalUp>, ModelError>;

    fn describe(&self) -> String;
}

/// Object-safe face of [`GlobalState`].
pub trait DynGlobal<U, V, GU, GV>: Send {
    fn view(&self, child: ModelId) -> Option<V>;
    fn transition(
        &mut self,
        elapsed: SimTime,
        bag: &[(ModelId, U)],
        parent: Option<&GV>,
    ) -> Result<Option<GU>, ModelError>;
    fn describe(&self) -> String;
    fn box_clone(&self) -> Box<dyn DynGlobal<U, V, GU, GV>>;
    fn as_any(&self) -> &dyn Any;
}

impl<G: GlobalState> DynGlobal<G::Up, G::View, G::GlobalUp, G::ParentView> for G {
    fn view(&self, child: ModelId) -> Option<G::View> {
        GlobalState::view(self, child)
    }
    fn transition(
        &mut self,
        elapsed: SimTime,
        bag: &[(ModelId, G::Up)],
        parent: Option<&G::ParentView>,
    ) -> Result<Option<G::GlobalUp>, ModelError> {
        GlobalState::transition(self, elapsed, bag, parent)
    }
    fn describe(&self) -> String {
        GlobalState::describe(self)
    }
    fn box_clone(&self) -> Box<dyn DynGlobal<G::Up, G::View, G::GlobalUp, G::ParentView>> {
        Box::new(self.clone())
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub type BoxedGlobal<U, V, GU, GV> = Box<dyn DynGlobal<U, V, GU, GV>>;

/// Influencer sets and translation functions of a coupled model.
pub trait Couplings<M>: Send + Sync {
    /// Every `(source, destination)` pair that may carry a message.
    fn links(&self) -> Vec<(Endpoint, Endpoint)>;

    /// Translates an output of `from` into inputs for its influencees, in
    /// ascending destination order. A translation may drop the message.
    fn route(&self, from: Endpoint, msg: &M, out: &mut Vec<(Endpoint, M)>);
}

type Translator<M> = Arc<dyn Fn(&M) -> Option<M> + Send + Sync>;

/// Static coupling table with optional per-link translations.
pub struct CouplingTable<M> {
    table: BTreeMap<Endpoint, Vec<(Endpoint, Option<Translator<M>>)>>,
}

impl<M> Default for CouplingTable<M> {
    fn default() -> Self {
        CouplingTable { table: BTreeMap::new() }
    }
}

impl<M> CouplingTable<M> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn couple(mut self, from: Endpoint, to: Endpoint) -> Self {
        self.insert(from, to, None);
        self
    }

    pub fn couple_with(
        mut self,
        from: Endpoint,
        to: Endpoint,
        z: impl Fn(&M) -> Option<M> + Send + Sync + 'static,
    ) -> Self {
        self.insert(from, to, Some(Arc::new(z)));
        self
    }

    fn insert(&mut self, from: Endpoint, to: Endpoint, z: Option<Translator<M>>) {
        let dests = self.table.entry(from).or_default();
        dests.retain(|(d, _)| *d != to);
        dests.push((to, z));
        dests.sort_by_key(|(d, _)| *d);
    }
}

impl<M: Clone + Send + Sync> Couplings<M> for CouplingTable<M> {
    fn links(&self) -> Vec<(Endpoint, Endpoint)> {
        self.table
            .iter()
            .flat_map(|(from, dests)| dests.iter().map(move |(to, _)| (*from, *to)))
            .collect()
    }

    fn route(&self, from: Endpoint, msg: &M, out: &mut Vec<(Endpoint, M)>) {
        if let Some(dests) = self.table.get(&from) {
            for (to, z) in dests {
                let translated = match z {
                    Some(z) => z(msg),
                    None => Some(msg.clone()),
                };
                if let Some(m) = translated {
                    out.push((*to, m));
                }
            }
        }
    }
}

/// A component of a coupled model.
pub enum Component<M, U, V> {
    Atomic(BoxedAtomic<M, U, V>),
    Coupled(Box<dyn CoupledNode<M, U, V>>),
}

/// Object-safe face of a nested coupled model whose up/macro channels towards
/// its parent are `U`/`V`. Implemented by [`Coupled`].
pub trait CoupledNode<M, U, V>: Send {
    fn name(&self) -> &str;
    fn validate_into(&self, path: &str, report: &mut ValidationReport);
    fn into_processor(self: Box<Self>, path: String) -> Box<dyn Processor<M, U, V>>;
    fn flatten_boxed(self: Box<Self>) -> BoxedAtomic<M, U, V>;
}

/// A coupled model. `U`/`V` are the channels to its children, `GU`/`GV` the
/// channels to its own parent (both [`Null`] at the root).
pub struct Coupled<M, U, V, GU = Null, GV = Null> {
    pub(crate) name: String,
    pub(crate) components: Vec<(ModelId, Component<M, U, V>)>,
    pub(crate) couplings: Arc<dyn Couplings<M>>,
    pub(crate) select: Select,
    pub(crate) global: Option<BoxedGlobal<U, V, GU, GV>>,
    pub(crate) invoke_on_empty_bag: bool,
}

impl<M, U, V, GU, GV> Coupled<M, U, V, GU, GV>
where
    M: Payload + Sync,
    U: Payload,
    V: Send + 'static,
    GU: Payload,
    GV: Send + 'static,
{
    pub fn new(name: impl Into<String>) -> Self {
        Coupled {
            name: name.into(),
            components: Vec::new(),
            couplings: Arc::new(CouplingTable::<M>::new()),
            select: Select::LowestId,
            global: None,
            invoke_on_empty_bag: false,
        }
    }

    pub fn add_atomic<A>(&mut self, id: impl Into<ModelId>, model: A) -> &mut Self
    where
        A: Atomic<Message = M, Up = U, View = V> + 'static,
    {
        self.components.push((id.into(), Component::Atomic(Box::new(model))));
        self
    }

    pub fn add_boxed(&mut self, id: impl Into<ModelId>, model: BoxedAtomic<M, U, V>) -> &mut Self {
        self.components.push((id.into(), Component::Atomic(model)));
        self
    }

    /// Adds a nested coupled model whose parent-facing channels are this
    /// model's child channels.
    pub fn add_coupled<U2, V2>(&mut self, id: impl Into<ModelId>, model: Coupled<M, U2, V2, U, V>) -> &mut Self
    where
        U2: Payload,
        V2: Send + 'static,
    {
        self.components.push((id.into(), Component::Coupled(Box::new(model))));
        self
    }

    pub fn with_couplings(mut self, couplings: impl Couplings<M> + 'static) -> Self {
        self.couplings = Arc::new(couplings);
        self
    }

    pub fn set_couplings(&mut self, couplings: Arc<dyn Couplings<M>>) -> &mut Self {
        self.couplings = couplings;
        self
    }

    pub fn with_select(mut self, select: Select) -> Self {
        self.select = select;
        self
    }

    pub fn with_global<G>(mut self, global: G) -> Self
    where
        G: GlobalState<Up = U, View = V, GlobalUp = GU, ParentView = GV>,
    {
        self.global = Some(Box::new(global));
        self
    }

    /// Invoke `δ_G` on star cycles that produced no up-messages. Off by default.
    pub fn invoke_global_on_empty_bag(mut self, on: bool) -> Self {
        self.invoke_on_empty_bag = on;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn has_global(&self) -> bool {
        self.global.is_some()
    }

    /// Coupling links as `(from, to)` pairs.
    pub fn links(&self) -> Vec<(Endpoint, Endpoint)> {
        self.couplings.links()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        self.validate_into_path(&self.name, &mut report);
        report
    }

    fn validate_into_path(&self, path: &str, report: &mut ValidationReport) {
        crate::validate::check_coupled(
            path,
            &self.components.iter().map(|(id, _)| *id).collect::<Vec<_>>(),
            &self.couplings.links(),
            &self.select,
            report,
        );
        for (id, c) in &self.components {
            if let Component::Coupled(inner) = c {
                inner.validate_into(&format!("{path}/{id}"), report);
            }
        }
    }

    /// Components sorted by id; used by the engine and the transforms.
    pub(crate) fn sorted_components(&mut self) {
        self.components.sort_by_key(|(id, _)| *id);
    }
}

impl<M, U, V, GU, GV> CoupledNode<M, GU, GV> for Coupled<M, U, V, GU, GV>
where
    M: Payload + Sync,
    U: Payload,
    V: Send + 'static,
    GU: Payload,
    GV: Send + 'static,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn validate_into(&self, path: &str, report: &mut ValidationReport) {
        self.validate_into_path(path, report);
    }

    fn into_processor(self: Box<Self>, path: String) -> Box<dyn Processor<M, GU, GV>> {
        Box::new(Coordinator::new(*self, path))
    }

    fn flatten_boxed(self: Box<Self>) -> BoxedAtomic<M, GU, GV> {
        Box::new(Flattened::new(*self))
    }
}
