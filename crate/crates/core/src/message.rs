use std::fmt;

use crate::time::SimTime;

/// The message kinds exchanged between processors.
///
/// The sequential engine realises these as method calls; the tag survives in
/// diagnostics and in trace records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MessageTag {
    Init,
    Star,
    X,
    Y,
    YUp,
    /// Implicit in call return; kept so diagnostics can name it.
    Done,
}

impl fmt::Display for MessageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MessageTag::Init => "i",
            MessageTag::Star => "*",
            MessageTag::X => "x",
            MessageTag::Y => "y",
            MessageTag::YUp => "y-up",
            MessageTag::Done => "done",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelMessage<P, V> {
    pub tag: MessageTag,
    pub time: SimTime,
    pub payload: Option<P>,
    /// Only meaningful on star and x messages.
    pub macro_view: Option<V>,
}

impl<P, V> KernelMessage<P, V> {
    pub fn star(time: SimTime, macro_view: Option<V>) -> Self {
        KernelMessage { tag: MessageTag::Star, time, payload: None, macro_view }
    }

    pub fn x(time: SimTime, payload: P, macro_view: Option<V>) -> Self {
        KernelMessage { tag: MessageTag::X, time, payload: Some(payload), macro_view }
    }

    pub fn y_up(time: SimTime, payload: P) -> Self {
        KernelMessage { tag: MessageTag::YUp, time, payload: Some(payload), macro_view: None }
    }
}

/// The empty set. Used for channels a model does not have, e.g. the up and
/// macro channels of a root coupled model or of a lifted classic atomic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Null {}

impl fmt::Display for Null {
    fn fmt(&self, _f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {}
    }
}
