//! Flatten and lower gallery models, and check them against the
//! hierarchical run.

use ebdevs::transform::{flatten, lower, trace_equivalent, Equivalence, Projection};
use ebdevs::{Coupled, Null, Observation, Payload, SimTime, Simulation};
use ebdevs_models::{boids, mito, sir, ParamError};

use crate::gallery::ModelSpec;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TransformKind {
    Flatten,
    Lower,
}

/// Outcome of one seed: hierarchical vs flattened (identity projection) and
/// hierarchical vs lowered (broadcast steps filtered out).
#[derive(Clone, Debug)]
pub struct SeedCheck {
    pub seed: u64,
    pub observations: usize,
    pub flatten: Equivalence,
    pub lower: Equivalence,
}

impl SeedCheck {
    pub fn passed(&self) -> bool {
        self.flatten.equivalent && self.lower.equivalent
    }
}

/// Horizon used for equivalence runs: SIR runs until every agent is
/// passive, the others over a fixed window.
pub fn check_horizon(spec: &ModelSpec) -> f64 {
    match spec {
        ModelSpec::Sir(_) => f64::INFINITY,
        ModelSpec::Boids(_) => 50.0,
        ModelSpec::Mito(p) => 2.0 * p.cycle_period + 1.0,
    }
}

fn observe<M: Payload + Sync>(sim: Simulation<M>, horizon: f64) -> Result<Vec<Observation>> {
    let mut sim = sim.with_observations();
    sim.initialize(SimTime::ZERO)?;
    sim.run_until(SimTime::new(horizon)?)?;
    Ok(sim.take_observations())
}

fn check_one<M, U, V, F>(build: F, seed: u64, horizon: f64) -> Result<SeedCheck>
where
    M: Payload + Sync,
    U: Payload + Sync,
    V: Send + 'static,
    F: Fn() -> Result<Coupled<M, U, V, Null, Null>, ParamError>,
{
    let hier = observe(Simulation::new(build()?)?, horizon)?;
    let m = build()?;
    let name = m.name().to_string();
    let flat = observe(Simulation::from_atomic(name, flatten(m)), horizon)?;
    let low = observe(Simulation::new(lower(build()?)?)?, horizon)?;
    Ok(SeedCheck {
        seed,
        observations: hier.len(),
        flatten: trace_equivalent(&hier, &flat, Projection::Identity),
        lower: trace_equivalent(&hier, &low, Projection::BroadcastFiltered),
    })
}

pub fn verify_equivalence(spec: &ModelSpec, seeds: &[u64], horizon: f64) -> Result<Vec<SeedCheck>> {
    seeds
        .iter()
        .map(|&seed| match spec {
            ModelSpec::Sir(p) => check_one(|| sir::build(p, seed, 0), seed, horizon),
            ModelSpec::Boids(p) => check_one(|| boids::build(p, seed, 0), seed, horizon),
            ModelSpec::Mito(p) => check_one(|| mito::build(p, seed, 0), seed, horizon),
        })
        .collect()
}

fn describe<M, U, V>(m: Coupled<M, U, V, Null, Null>, kind: TransformKind, horizon: f64) -> Result<String>
where
    M: Payload + Sync,
    U: Payload + Sync,
    V: Send + 'static,
{
    let name = m.name().to_string();
    let (children, links) = (m.len(), m.links().len());
    let before = format!("{name}: {children} atomic components, {links} couplings, global state: {}", m.has_global());
    let (after, cycles) = match kind {
        TransformKind::Flatten => {
            let mut sim = Simulation::from_atomic(name.clone(), flatten(m));
            sim.initialize(SimTime::ZERO)?;
            sim.run_until(SimTime::new(horizon)?)?;
            (format!("flattened: one atomic model `{name}` wrapping {children} components"), sim.cycles())
        }
        TransformKind::Lower => {
            let low = lower(m)?;
            let text = format!(
                "lowered: {} Classic DEVS components, {} couplings, global state: {}",
                low.len(),
                low.links().len(),
                low.has_global()
            );
            let mut sim = Simulation::new(low)?;
            sim.initialize(SimTime::ZERO)?;
            sim.run_until(SimTime::new(horizon)?)?;
            (text, sim.cycles())
        }
    };
    let horizon = if horizon.is_finite() { horizon.to_string() } else { "passivity".to_string() };
    Ok(format!("{before}\n{after}\nran to {horizon} in {cycles} root cycles"))
}

/// Applies `kind` to `spec` (seed 0), runs the result and describes both.
pub fn transform_report(spec: &ModelSpec, kind: TransformKind, horizon: f64) -> Result<String> {
    match spec {
        ModelSpec::Sir(p) => describe(sir::build(p, 0, 0)?, kind, horizon),
        ModelSpec::Boids(p) => describe(boids::build(p, 0, 0)?, kind, horizon),
        ModelSpec::Mito(p) => describe(mito::build(p, 0, 0)?, kind, horizon),
    }
}
