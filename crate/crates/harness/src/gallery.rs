//! Named model configurations and the per-model sampled series.

use std::io::Write;

use ebdevs::{Payload, SimError, SimTime, Simulation};
use ebdevs_models::boids::{self, BoidsParams, FlockGlobal, Variant};
use ebdevs_models::mito::{self, CellGlobal, MitoParams};
use ebdevs_models::sir::{self, SirGlobal, SirParams};
use serde_json::{Map, Value};

use crate::aggregate::Series;
use crate::{HarnessError, Result};

pub const MODELS: [(&str, &str); 6] = [
    ("sir-cm", "SIR epidemic on a configuration-model network"),
    ("sir-cm-v", "SIR-CM where susceptible agents refuse infection during fast outbreaks"),
    ("boids", "boids flocking on a torus"),
    ("boids-fa", "boids with an anti-cohesion rule while the flock is fragmented"),
    ("boids-ba", "boids with limited super-cohesion periods while the flock is fragmented"),
    ("mito", "mitochondrial fusion and fission in a 2-D cell"),
];

pub const SIR_COLUMNS: [&str; 5] = ["time", "nS", "nI", "nR", "outbreak_active"];
pub const BOIDS_COLUMNS: [&str; 6] =
    ["time", "n_clusters", "mean_cluster_size", "intra_avg_dist", "intra_complete_dist", "event_active"];
pub const MITO_COLUMNS: [&str; 9] = [
    "time",
    "n_small",
    "n_medium",
    "n_large",
    "frac_small",
    "frac_medium",
    "frac_large",
    "total_mass",
    "n_active",
];

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Sir(SirParams),
    Boids(BoidsParams),
    Mito(MitoParams),
}

fn merged<T>(defaults: &T, overrides: &Map<String, Value>) -> Result<T>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let Value::Object(mut base) = serde_json::to_value(defaults)? else {
        unreachable!("parameter structs serialize to objects")
    };
    for (k, v) in overrides {
        if !base.contains_key(k) {
            let known: Vec<&str> = base.keys().map(String::as_str).collect();
            return Err(HarnessError::Config(format!("unknown parameter `{k}` (known: {}, horizon)", known.join(", "))));
        }
        base.insert(k.clone(), v.clone());
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| HarnessError::Config(format!("bad parameter value: {e}")))
}

impl ModelSpec {
    /// Defaults of a gallery model, before any override.
    pub fn named(name: &str) -> Result<Self> {
        Ok(match name {
            "sir-cm" => ModelSpec::Sir(SirParams::default()),
            "sir-cm-v" => ModelSpec::Sir(SirParams { vaccination: true, ..SirParams::default() }),
            "boids" => ModelSpec::Boids(BoidsParams::default()),
            "boids-fa" => ModelSpec::Boids(BoidsParams { variant: Variant::Fa, ..BoidsParams::default() }),
            "boids-ba" => ModelSpec::Boids(BoidsParams { variant: Variant::Ba, ..BoidsParams::default() }),
            "mito" => ModelSpec::Mito(MitoParams::default()),
            other => {
                let names: Vec<&str> = MODELS.iter().map(|m| m.0).collect();
                return Err(HarnessError::Config(format!("unknown model `{other}` (known: {})", names.join(", "))));
            }
        })
    }

    /// Gallery defaults with `overrides` applied. A `horizon` key is split
    /// off and returned separately.
    pub fn with_overrides(name: &str, overrides: &Map<String, Value>) -> Result<(Self, Option<f64>)> {
        let mut overrides = overrides.clone();
        let horizon = match overrides.remove("horizon") {
            None => None,
            Some(v) => Some(v.as_f64().ok_or_else(|| HarnessError::Config(format!("horizon must be a number, got {v}")))?),
        };
        let spec = match ModelSpec::named(name)? {
            ModelSpec::Sir(p) => ModelSpec::Sir(merged(&p, &overrides)?),
            ModelSpec::Boids(p) => ModelSpec::Boids(merged(&p, &overrides)?),
            ModelSpec::Mito(p) => ModelSpec::Mito(merged(&p, &overrides)?),
        };
        spec.validate()?;
        Ok((spec, horizon))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Sir(p) => p.validate()?,
            ModelSpec::Boids(p) => p.validate()?,
            ModelSpec::Mito(p) => p.validate()?,
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Sir(p) if p.vaccination => "sir-cm-v",
            ModelSpec::Sir(_) => "sir-cm",
            ModelSpec::Boids(p) => match p.variant {
                Variant::Vanilla => "boids",
                Variant::Fa => "boids-fa",
                Variant::Ba => "boids-ba",
            },
            ModelSpec::Mito(_) => "mito",
        }
    }

    pub fn default_horizon(&self) -> f64 {
        match self {
            ModelSpec::Sir(_) => 150.0,
            ModelSpec::Boids(_) => 250.0,
            ModelSpec::Mito(_) => 3600.0,
        }
    }

    pub fn default_dt(&self) -> f64 {
        match self {
            ModelSpec::Sir(_) | ModelSpec::Boids(_) => 1.0,
            ModelSpec::Mito(p) => p.cycle_period,
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            ModelSpec::Sir(_) => &SIR_COLUMNS,
            ModelSpec::Boids(_) => &BOIDS_COLUMNS,
            ModelSpec::Mito(_) => &MITO_COLUMNS,
        }
    }

    /// The same model scaled down to roughly `size` agents: agents for SIR,
    /// birds for boids (on a proportionally smaller torus), and active
    /// mitochondria for mito.
    pub fn reduced(&self, size: usize) -> Result<Self> {
        let spec = match self {
            ModelSpec::Sir(p) => ModelSpec::Sir(SirParams { n: size, ..p.clone() }),
            ModelSpec::Boids(p) => {
                let scale = (size as f64 / p.n_birds as f64).sqrt();
                ModelSpec::Boids(BoidsParams { n_birds: size, grid_size: (p.grid_size * scale).max(4.0 * p.radius), ..p.clone() })
            }
            ModelSpec::Mito(p) => {
                // mean mass is (m_min + m_max) / 2
                let total_mass = size as f64 * (p.m_min + p.m_max) / 2.0;
                ModelSpec::Mito(MitoParams { total_mass, pool: None, ..p.clone() })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Settings of a single replication.
#[derive(Clone, Debug)]
pub struct RunSettings {
    pub horizon: f64,
    pub dt: f64,
    pub legitimacy_budget: u64,
}

fn sampled<M, F>(mut sim: Simulation<M>, settings: &RunSettings, columns: &[&str], mut row: F) -> Result<Series, SimError>
where
    M: Payload + Sync,
    F: FnMut(&Simulation<M>) -> Result<Vec<f64>, ebdevs::ModelError>,
{
    sim.initialize(SimTime::ZERO)?;
    let mut rows = Vec::new();
    sim.run_sampled(SimTime::new(settings.horizon)?, SimTime::new(settings.dt)?, |t, s| {
        let mut r = vec![t.value()];
        r.extend(row(s).map_err(|source| SimError::Model { path: "sample".into(), source })?);
        rows.push(r);
        Ok(())
    })?;
    Ok(Series::new(columns.iter().map(|c| c.to_string()).collect(), rows))
}

fn with_trace<M: Payload + Sync>(sim: Simulation<M>, budget: u64, trace: Option<Box<dyn Write + Send>>) -> Result<Simulation<M>, SimError> {
    let sim = sim.with_legitimacy_budget(budget);
    match trace {
        Some(w) => sim.with_csv_trace(w),
        None => Ok(sim),
    }
}

fn missing(what: &str) -> ebdevs::ModelError {
    ebdevs::ModelError::Invariant(format!("root model has no {what} global state"))
}

/// Runs replication `stream` of `spec` and returns its sampled series.
/// `trace`, when given, receives the full event trace as CSV.
pub fn run_replication(
    spec: &ModelSpec,
    seed: u64,
    stream: u64,
    settings: &RunSettings,
    trace: Option<Box<dyn Write + Send>>,
) -> Result<Series> {
    let budget = settings.legitimacy_budget;
    let series = match spec {
        ModelSpec::Sir(p) => {
            let sim = with_trace(Simulation::new(sir::build(p, seed, stream)?)?, budget, trace)?;
            sampled(sim, settings, &SIR_COLUMNS, |s| {
                let g = s.global::<SirGlobal>().ok_or_else(|| missing("SIR"))?;
                let (ns, ni, nr) = g.counts();
                Ok(vec![ns as f64, ni as f64, nr as f64, f64::from(u8::from(g.outbreak_active()))])
            })?
        }
        ModelSpec::Boids(p) => {
            let sim = with_trace(Simulation::new(boids::build(p, seed, stream)?)?, budget, trace)?;
            sampled(sim, settings, &BOIDS_COLUMNS, |s| {
                let g = s.global::<FlockGlobal>().ok_or_else(|| missing("flock"))?;
                let c = g.summary();
                Ok(vec![
                    c.n_clusters as f64,
                    c.mean_size,
                    c.intra_avg_dist,
                    c.intra_complete_dist,
                    f64::from(u8::from(g.event_active())),
                ])
            })?
        }
        ModelSpec::Mito(p) => {
            let sim = with_trace(Simulation::new(mito::build(p, seed, stream)?)?, budget, trace)?;
            sampled(sim, settings, &MITO_COLUMNS, |s| {
                let g = s.global::<CellGlobal>().ok_or_else(|| missing("cell"))?;
                let c = g.census()?;
                let (fs, fm, fl) = c.fractions();
                Ok(vec![
                    c.small as f64,
                    c.medium as f64,
                    c.large as f64,
                    fs,
                    fm,
                    fl,
                    g.total_mass(),
                    g.n_active() as f64,
                ])
            })?
        }
    };
    Ok(series)
}
