//! Structural checks on coupled models.

use std::collections::BTreeSet;
use std::fmt;

use crate::ids::{Endpoint, ModelId};
use crate::select::Select;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, path: &str, message: impl Into<String>) {
        self.violations.push(Violation { path: path.to_string(), message: message.into() });
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

/// Checks one level of a coupled model. Nested models are checked by the caller.
pub(crate) fn check_coupled(
    path: &str,
    ids: &[ModelId],
    links: &[(Endpoint, Endpoint)],
    select: &Select,
    report: &mut ValidationReport,
) {
    if ids.is_empty() {
        report.push(path, "coupled model has no components");
        return;
    }
    let mut known = BTreeSet::new();
    for id in ids {
        if !known.insert(*id) {
            report.push(path, format!("duplicate component id {id}"));
        }
    }
    for &(from, to) in links {
        for end in [from, to] {
            if let Endpoint::Child(id) = end {
                if !known.contains(&id) {
                    report.push(path, format!("coupling {from}->{to} references unknown component {id}"));
                }
            }
        }
        match (from, to) {
            (Endpoint::Child(a), Endpoint::Child(b)) if a == b => {
                report.push(path, format!("self-influence at {a}"));
            }
            (Endpoint::Parent, Endpoint::Parent) => {
                report.push(path, "direct coupling from own input to own output");
            }
            _ => {}
        }
    }
    if let Select::Custom(_) = select {
        // totality can only be sampled: every singleton and the full set
        let all: Vec<ModelId> = known.iter().copied().collect();
        for id in &all {
            if select.choose(&[*id]).is_err() {
                report.push(path, format!("select is not total: rejects {{{id}}}"));
            }
        }
        if select.choose(&all).is_err() {
            report.push(path, "select is not total: result outside the full component set");
        }
    }
}
