//! Replication series and their aggregation onto a common grid.

use crate::{HarnessError, Result};

/// Sampled output of one replication. Column 0 is time.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Series { columns, rows }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Value of `name` at the last row with time ≤ `t`.
    pub fn at(&self, name: &str, t: f64) -> Option<f64> {
        let c = self.column(name)?;
        self.rows.iter().take_while(|r| r[0] <= t).last().map(|r| r[c])
    }

    /// Zero-order hold onto `grid`. Points before the first row take the
    /// first row's values, so no value outside the observed range appears.
    pub fn resample(&self, grid: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(grid.len());
        let mut k = 0;
        for &t in grid {
            while k + 1 < self.rows.len() && self.rows[k + 1][0] <= t {
                k += 1;
            }
            let mut row = self.rows.get(k).cloned().unwrap_or_default();
            if let Some(first) = row.first_mut() {
                *first = t;
            }
            out.push(row);
        }
        out
    }
}

/// Grid `0, dt, 2dt, …` up to `horizon`, by multiplication.
pub fn grid(horizon: f64, dt: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = dt * k as f64;
        if t > horizon {
            return out;
        }
        out.push(t);
        k += 1;
    }
}

/// Per-bin mean and sample standard deviation of every column.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    /// Data columns (time excluded).
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
    /// Replications that contributed.
    pub completed: usize,
}

impl Summary {
    pub fn mean_of(&self, column: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|x| x == column)?;
        Some(self.mean.iter().map(|r| r[c]).collect())
    }

    pub fn std_of(&self, column: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|x| x == column)?;
        Some(self.std.iter().map(|r| r[c]).collect())
    }
}

pub fn aggregate(series: &[Series], horizon: f64, dt: f64) -> Result<Summary> {
    let Some(first) = series.first() else {
        return Err(HarnessError::Config("nothing to aggregate: no replication completed".into()));
    };
    if !(dt > 0.0) {
        return Err(HarnessError::Config(format!("sample interval must be positive, got {dt}")));
    }
    if let Some(s) = series.iter().find(|s| s.columns != first.columns) {
        return Err(HarnessError::Config(format!("mismatched columns {:?} and {:?}", first.columns, s.columns)));
    }
    let times = grid(horizon, dt);
    let width = first.columns.len() - 1;
    let resampled: Vec<Vec<Vec<f64>>> = series.iter().map(|s| s.resample(&times)).collect();
    let n = series.len() as f64;
    let mut mean = vec![vec![0.0; width]; times.len()];
    let mut std = vec![vec![0.0; width]; times.len()];
    for b in 0..times.len() {
        for c in 0..width {
            let values = resampled.iter().map(|r| r[b].get(c + 1).copied().unwrap_or(f64::NAN));
            let m = values.clone().sum::<f64>() / n;
            let var = if series.len() > 1 { values.map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            mean[b][c] = m;
            std[b][c] = var.sqrt();
        }
    }
    Ok(Summary { columns: first.columns[1..].to_vec(), times, mean, std, completed: series.len() })
}
