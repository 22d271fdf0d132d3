//! Experiment configuration: a JSON document, overridable from the CLI.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::gallery::ModelSpec;
use crate::{HarnessError, Result};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "EBDEVS_OUT";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    /// Sampled series only.
    #[default]
    Sampled,
    /// Sampled series plus every trace record.
    Full,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub replications: Option<u32>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub trace: Option<TraceMode>,
    #[serde(default)]
    pub sample_dt: Option<f64>,
    #[serde(default)]
    pub legitimacy_budget: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything and fills in defaults. No run starts before this
    /// succeeds.
    pub fn resolve(&self) -> Result<Experiment> {
        let name = self.model.as_deref().ok_or_else(|| HarnessError::Config("no model given".into()))?;
        let (spec, param_horizon) = ModelSpec::with_overrides(name, &self.params)?;
        let horizon = self.horizon.or(param_horizon).unwrap_or_else(|| spec.default_horizon());
        let dt = self.sample_dt.unwrap_or_else(|| spec.default_dt());
        let replications = self.replications.unwrap_or(1);
        if replications == 0 {
            return Err(HarnessError::Config("replications must be at least 1".into()));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(HarnessError::Config(format!("horizon must be finite and non-negative, got {horizon}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(HarnessError::Config(format!("sample_dt must be positive, got {dt}")));
        }
        let budget = self.legitimacy_budget.unwrap_or(ebdevs::sim::DEFAULT_LEGITIMACY_BUDGET);
        if budget == 0 {
            return Err(HarnessError::Config("legitimacy_budget must be at least 1".into()));
        }
        let out = self
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Experiment {
            spec,
            seed: self.seed.unwrap_or(0),
            replications,
            horizon,
            dt,
            out,
            trace: self.trace.unwrap_or_default(),
            legitimacy_budget: budget,
        })
    }
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub spec: ModelSpec,
    pub seed: u64,
    pub replications: u32,
    pub horizon: f64,
    pub dt: f64,
    pub out: PathBuf,
    pub trace: TraceMode,
    pub legitimacy_budget: u64,
}
