//! Observation-sequence comparison between runs.

use std::fmt;

use crate::sim::trace::Observation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// Compare every observation as recorded.
    Identity,
    /// Drop replica/broadcast bookkeeping (entries whose path contains `#`,
    /// which also removes global-state entries) and collapse the zero-time
    /// cycles that only move broadcasts around.
    BroadcastFiltered,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub index: usize,
    pub left: Option<String>,
    pub right: Option<String>,
    pub reason: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "observation {}: {} (left: {}, right: {})",
            self.index,
            self.reason,
            self.left.as_deref().unwrap_or("<end>"),
            self.right.as_deref().unwrap_or("<end>")
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// Number of projected observations compared.
    pub compared: usize,
    pub divergence: Option<Divergence>,
}

/// Relative tolerance on event times. Transformed models reach the same event
/// times through different float sums, so times can differ in the last ulps.
pub const TIME_TOLERANCE: f64 = 1e-9;

fn times_match(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= TIME_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

fn project(obs: &[Observation], projection: Projection) -> Vec<Observation> {
    match projection {
        Projection::Identity => obs.to_vec(),
        Projection::BroadcastFiltered => {
            let mut out: Vec<Observation> = Vec::with_capacity(obs.len());
            for o in obs {
                let states: Vec<(String, String)> =
                    o.states.iter().filter(|(p, _)| !p.contains('#')).cloned().collect();
                let output = o.output.clone().filter(|s| !s.starts_with("bOPort"));
                if let Some(prev) = out.last() {
                    if times_match(prev.time.value(), o.time.value()) && prev.states == states && output.is_none() {
                        continue;
                    }
                }
                out.push(Observation { time: o.time, output, states });
            }
            out
        }
    }
}

fn summarize(o: &Observation) -> String {
    format!("t={} output={}", o.time, o.output.as_deref().unwrap_or(""))
}

/// Compares two runs' observation sequences under `projection`. Times match
/// up to [`TIME_TOLERANCE`]; states and outputs must be equal exactly.
pub fn trace_equivalent(left: &[Observation], right: &[Observation], projection: Projection) -> Equivalence {
    let a = project(left, projection);
    let b = project(right, projection);
    let n = a.len().min(b.len());
    for i in 0..n {
        let (x, y) = (&a[i], &b[i]);
        let reason = if !times_match(x.time.value(), y.time.value()) {
            Some(("time differs".to_string(), summarize(x), summarize(y)))
        } else if x.output != y.output {
            Some(("output differs".to_string(), summarize(x), summarize(y)))
        } else if x.states.len() != y.states.len() {
            Some((
                format!("state vector length {} vs {}", x.states.len(), y.states.len()),
                summarize(x),
                summarize(y),
            ))
        } else {
            x.states.iter().zip(&y.states).find(|(p, q)| p != q).map(|(p, q)| {
                (format!("state differs at t={}", x.time), format!("{}={}", p.0, p.1), format!("{}={}", q.0, q.1))
            })
        };
        if let Some((reason, l, r)) = reason {
            return Equivalence {
                equivalent: false,
                compared: i,
                divergence: Some(Divergence { index: i, left: Some(l), right: Some(r), reason }),
            };
        }
    }
    if a.len() != b.len() {
        return Equivalence {
            equivalent: false,
            compared: n,
            divergence: Some(Divergence {
                index: n,
                left: a.get(n).map(summarize),
                right: b.get(n).map(summarize),
                reason: format!("lengths differ: {} vs {}", a.len(), b.len()),
            }),
        };
    }
    Equivalence { equivalent: true, compared: n, divergence: None }
}
