//! Classic DEVS atomics and their embedding with null micro-macro channels.

use std::marker::PhantomData;

use crate::error::ModelError;
use crate::model::Atomic;
use crate::time::SimTime;

/// A Classic DEVS atomic model: no up-messages, no macro view.
pub trait ClassicAtomic: Send {
    type Message;

    fn time_advance(&self) -> SimTime;
    fn internal(&mut self);
    fn external(&mut self, elapsed: SimTime, input: &Self::Message);
    fn output(&self) -> Option<Self::Message>;
    fn describe(&self) -> String;
}

/// A classic atomic seen as an atomic with micro-macro channels that ignores
/// its macro view and never sends up-messages.
pub struct Lifted<A, U, V> {
    inner: A,
    _channels: PhantomData<fn() -> (U, V)>,
}

impl<A, U, V> Lifted<A, U, V> {
    pub fn inner(&self) -> &A {
        &self.inner
    }
}

pub fn classic_lift<A: ClassicAtomic, U, V>(model: A) -> Lifted<A, U, V> {
    Lifted { inner: model, _channels: PhantomData }
}

impl<A: ClassicAtomic, U, V> Atomic for Lifted<A, U, V> {
    type Message = A::Message;
    type Up = U;
    type View = V;

    fn time_advance(&self) -> SimTime {
        self.inner.time_advance()
    }

    fn internal(&mut self, _view: Option<&V>) -> Result<Option<U>, ModelError> {
        self.inner.internal();
        Ok(None)
    }

    fn external(&mut self, elapsed: SimTime, input: &A::Message, _view: Option<&V>) -> Result<Option<U>, ModelError> {
        self.inner.external(elapsed, input);
        Ok(None)
    }

    fn output(&self) -> Option<A::Message> {
        self.inner.output()
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}
