//! Replicated runs. Replication `i` uses random stream `i`; replications
//! run in parallel but results are always reported in stream order.

use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::aggregate::{aggregate, Series, Summary};
use crate::config::{Experiment, TraceMode};
use crate::gallery::{run_replication, RunSettings};
use crate::output::{write_atomic, write_series, write_summary};
use crate::{HarnessError, Result};

#[derive(Debug)]
pub struct Replication {
    pub stream: u64,
    pub result: Result<Series>,
}

impl Experiment {
    pub fn settings(&self) -> RunSettings {
        RunSettings { horizon: self.horizon, dt: self.dt, legitimacy_budget: self.legitimacy_budget }
    }

    /// Runs every replication in memory, without traces.
    pub fn run_in_memory(&self) -> Vec<Replication> {
        let settings = self.settings();
        (0..self.replications as u64)
            .into_par_iter()
            .map(|stream| Replication { stream, result: run_replication(&self.spec, self.seed, stream, &settings, None) })
            .collect()
    }

    pub fn summarize(&self, reps: &[Replication]) -> Result<Summary> {
        let done: Vec<Series> = reps.iter().filter_map(|r| r.result.as_ref().ok().cloned()).collect();
        aggregate(&done, self.horizon, self.dt)
    }

    fn file(&self, suffix: &str) -> PathBuf {
        self.out.join(format!("{}_seed{}_{suffix}", self.spec.name(), self.seed))
    }

    /// Runs the experiment and writes per-replication series, the summary and
    /// a manifest into the output directory. Returns the written paths.
    pub fn run_to_disk(&self) -> Result<ExperimentReport> {
        fs::create_dir_all(&self.out)?;
        let settings = self.settings();
        let reps: Vec<Replication> = (0..self.replications as u64)
            .into_par_iter()
            .map(|stream| {
                let result = match self.trace {
                    TraceMode::Sampled => run_replication(&self.spec, self.seed, stream, &settings, None),
                    TraceMode::Full => self.traced(stream, &settings),
                };
                Replication { stream, result }
            })
            .collect();

        let mut files = Vec::new();
        for r in &reps {
            if let Ok(series) = &r.result {
                let path = self.file(&format!("rep{:03}.csv", r.stream));
                write_atomic(&path, |w| write_series(series, w))?;
                files.push(path);
            }
        }
        let failures: Vec<(u64, String)> =
            reps.iter().filter_map(|r| r.result.as_ref().err().map(|e| (r.stream, e.to_string()))).collect();
        let summary = self.summarize(&reps).ok();
        if let Some(summary) = &summary {
            let path = self.file("summary.csv");
            write_atomic(&path, |w| write_summary(summary, w))?;
            files.push(path);
        }
        let manifest = Manifest {
            model: self.spec.name(),
            seed: self.seed,
            streams: (0..self.replications as u64).collect(),
            horizon: self.horizon,
            sample_dt: self.dt,
            completed: reps.len() - failures.len(),
            failures: failures.iter().map(|(stream, error)| Failure { stream: *stream, error: error.clone() }).collect(),
            params: match &self.spec {
                crate::gallery::ModelSpec::Sir(p) => serde_json::to_value(p)?,
                crate::gallery::ModelSpec::Boids(p) => serde_json::to_value(p)?,
                crate::gallery::ModelSpec::Mito(p) => serde_json::to_value(p)?,
            },
        };
        let path = self.file("manifest.json");
        write_atomic(&path, |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest)?;
            Ok(w.write_all(b"\n")?)
        })?;
        files.push(path);
        Ok(ExperimentReport { files, failures, summary })
    }

    fn traced(&self, stream: u64, settings: &RunSettings) -> Result<Series> {
        let path = self.file(&format!("rep{stream:03}_trace.csv"));
        let tmp = NamedTempFile::new_in(&self.out)?;
        let file = tmp.reopen()?;
        let series = run_replication(&self.spec, self.seed, stream, settings, Some(Box::new(std::io::BufWriter::new(file))))?;
        tmp.persist(path).map_err(|e| HarnessError::Io(e.error))?;
        Ok(series)
    }
}

#[derive(Serialize)]
struct Failure {
    stream: u64,
    error: String,
}

#[derive(Serialize)]
struct Manifest {
    model: &'static str,
    seed: u64,
    streams: Vec<u64>,
    horizon: f64,
    sample_dt: f64,
    completed: usize,
    failures: Vec<Failure>,
    params: serde_json::Value,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub files: Vec<PathBuf>,
    /// `(stream, error)` of every aborted replication.
    pub failures: Vec<(u64, String)>,
    pub summary: Option<Summary>,
}
