use std::fmt;

/// Component reference, unique within one coupled model.
///
/// The derived order is used for tie-breaking and for the order in which
/// bags of simultaneous up-messages are handed to the global transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelId(pub u32);

impl ModelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ModelId {
    fn from(v: u32) -> Self {
        ModelId(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PortKind {
    RegularIn,
    RegularOut,
    /// Only present on models produced by lowering.
    BroadcastIn,
    /// Only present on models produced by lowering.
    BroadcastOut,
    Up,
    Macro,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub kind: PortKind,
    pub name: &'static str,
}

impl PortRef {
    pub const IN: PortRef = PortRef { kind: PortKind::RegularIn, name: "in" };
    pub const OUT: PortRef = PortRef { kind: PortKind::RegularOut, name: "out" };
    pub const B_IN: PortRef = PortRef { kind: PortKind::BroadcastIn, name: "bIPort" };
    pub const B_OUT: PortRef = PortRef { kind: PortKind::BroadcastOut, name: "bOPort" };
    pub const UP: PortRef = PortRef { kind: PortKind::Up, name: "up" };
    pub const MACRO: PortRef = PortRef { kind: PortKind::Macro, name: "macro" };

    pub fn is_broadcast(&self) -> bool {
        matches!(self.kind, PortKind::BroadcastIn | PortKind::BroadcastOut)
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

/// One side of a coupling: the enclosing coupled model itself, or a child.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    Parent,
    Child(ModelId),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Parent => f.write_str("self"),
            Endpoint::Child(id) => write!(f, "{id}"),
        }
    }
}
