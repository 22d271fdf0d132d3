use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::KernelError;

/// Undirected simple graph stored as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeGraph {
    adjacency: Vec<Vec<usize>>,
}

impl DegreeGraph {
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn mean_degree(&self) -> f64 {
        if self.adjacency.is_empty() {
            return 0.0;
        }
        self.adjacency.iter().map(Vec::len).sum::<usize>() as f64 / self.n() as f64
    }

    /// No self-loops, no parallel edges, symmetric adjacency.
    pub fn is_simple(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(i, nbrs)| {
            nbrs.windows(2).all(|w| w[0] < w[1])
                && nbrs.iter().all(|&j| j != i && self.adjacency[j].binary_search(&i).is_ok())
        })
    }
}

/// How agent degrees are obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum DegreeSpec {
    Gamma { shape: f64, scale: f64 },
    /// Used as given; handy for deterministic fixtures.
    Fixed(Vec<usize>),
}

/// `n` Gamma(shape, scale) samples rounded to the nearest integer with a
/// floor of 1. If the total is odd, one uniformly chosen node gets one more
/// stub so that stub matching is possible.
pub fn gamma_degrees<R: Rng + ?Sized>(rng: &mut R, n: usize, shape: f64, scale: f64) -> Result<Vec<usize>, KernelError> {
    if n == 0 {
        return Err(KernelError::EmptyInput("gamma_degrees"));
    }
    let gamma = Gamma::new(shape, scale)
        .map_err(|e| KernelError::Usage(format!("gamma(shape={shape}, scale={scale}): {e}")))?;
    let mut degrees: Vec<usize> = (0..n).map(|_| (gamma.sample(rng).round() as usize).max(1)).collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let i = rng.random_range(0..n);
        degrees[i] += 1;
    }
    Ok(degrees)
}

pub fn degrees<R: Rng + ?Sized>(rng: &mut R, n: usize, spec: &DegreeSpec) -> Result<Vec<usize>, KernelError> {
    match spec {
        DegreeSpec::Gamma { shape, scale } => gamma_degrees(rng, n, *shape, *scale),
        DegreeSpec::Fixed(d) => {
            if d.len() != n {
                return Err(KernelError::Usage(format!("fixed degree sequence has {} entries, expected {n}", d.len())));
            }
            Ok(d.clone())
        }
    }
}

/// Configuration model by uniform stub matching. Self-loops and repeated
/// edges produced by the matching are discarded, so realised degrees can fall
/// slightly below the requested ones.
pub fn configuration_model<R: Rng + ?Sized>(rng: &mut R, degrees: &[usize]) -> Result<DegreeGraph, KernelError> {
    let n = degrees.len();
    if n < 2 {
        return Err(KernelError::Usage(format!("configuration model needs at least 2 nodes, got {n}")));
    }
    let total: usize = degrees.iter().sum();
    if total % 2 == 1 {
        return Err(KernelError::Usage(format!("degree sum {total} is odd")));
    }
    let mut stubs: Vec<usize> = degrees.iter().enumerate().flat_map(|(i, &d)| std::iter::repeat_n(i, d)).collect();
    stubs.shuffle(rng);
    let mut edges = BTreeSet::new();
    let mut dropped = 0usize;
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if a == b || !edges.insert((a, b)) {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::debug!("configuration model: discarded {dropped} of {} stub pairs", total / 2);
    }
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    Ok(DegreeGraph { adjacency })
}
