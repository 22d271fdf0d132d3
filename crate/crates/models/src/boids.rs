//! Boids on a torus. Birds steer using only what the flock's global state
//! tells them: the nearest bird, the flock-mates within the visibility
//! radius, and the current number of clusters.
//!
//! Variants:
//! - `vanilla`: separation, alignment, cohesion.
//! - `fa`: while the cluster count is above a threshold, alignment and
//!   cohesion are replaced by a turn away from the flock-mates' center.
//! - `ba`: when the cluster count is above a threshold, a bird enters a
//!   limited number of super-cohesion periods of decreasing length.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::collections::VecDeque;
use std::str::FromStr;
use std::sync::Arc;

use ebdevs::stochastic::RngStream;
use ebdevs::{Atomic, Coupled, CouplingTable, GlobalState, ModelError, ModelId, Null, SimTime};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{check, positive, ParamError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Vanilla,
    Fa,
    Ba,
}

impl FromStr for Variant {
    type Err = ParamError;
    fn from_str(s: &str) -> Result<Self, ParamError> {
        match s {
            "vanilla" => Ok(Variant::Vanilla),
            "fa" => Ok(Variant::Fa),
            "ba" => Ok(Variant::Ba),
            other => Err(ParamError::Invalid { name: "variant", reason: format!("unknown variant `{other}`") }),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Vanilla => "vanilla",
            Variant::Fa => "fa",
            Variant::Ba => "ba",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoidsParams {
    pub n_birds: usize,
    pub grid_size: f64,
    pub radius: f64,
    pub min_dist: f64,
    pub velocity: f64,
    pub variant: Variant,
    /// Turn bounds per step, in degrees.
    pub separation_turn: f64,
    pub alignment_turn: f64,
    pub cohesion_turn: f64,
    pub fa_threshold: usize,
    pub ba_threshold: usize,
    pub ba_duration: u32,
    pub ba_decay: f64,
    pub ba_activations: u32,
    /// Cohesion bound multiplier during super-cohesion.
    pub ba_cohesion_factor: f64,
}

impl Default for BoidsParams {
    fn default() -> Self {
        BoidsParams {
            n_birds: 200,
            grid_size: 70.0,
            radius: 5.0,
            min_dist: 0.5,
            velocity: 1.0,
            variant: Variant::Vanilla,
            separation_turn: 30.0,
            alignment_turn: 15.0,
            cohesion_turn: 10.0,
            fa_threshold: 10,
            ba_threshold: 10,
            ba_duration: 20,
            ba_decay: 0.5,
            ba_activations: 3,
            ba_cohesion_factor: 2.0,
        }
    }
}

impl BoidsParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check(self.n_birds >= 1, "n_birds", "need at least one bird")?;
        positive(self.grid_size, "grid_size")?;
        positive(self.radius, "radius")?;
        check(self.radius <= self.grid_size / 2.0, "radius", "must not exceed half the grid size")?;
        positive(self.velocity, "velocity")?;
        check(self.min_dist >= 0.0 && self.min_dist.is_finite(), "min_dist", "must be non-negative")?;
        for (v, name) in [
            (self.separation_turn, "separation_turn"),
            (self.alignment_turn, "alignment_turn"),
            (self.cohesion_turn, "cohesion_turn"),
        ] {
            check((0.0..=180.0).contains(&v), name, format!("must be in [0, 180] degrees, got {v}"))?;
        }
        check((0.0..=1.0).contains(&self.ba_decay), "ba_decay", "must be in [0, 1]")?;
        positive(self.ba_cohesion_factor, "ba_cohesion_factor")
    }
}

// ---- geometry ----

/// `x` wrapped into `[0, l)`.
pub fn wrap(x: f64, l: f64) -> f64 {
    let y = x.rem_euclid(l);
    // rem_euclid of a tiny negative number rounds up to `l`
    if y >= l {
        0.0
    } else {
        y
    }
}

/// Angle in `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    wrap(a, TAU)
}

/// Signed angle difference in `(-π, π]`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    let d = (to - from).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Minimum-image displacement from `a` to `b` on a ring of length `l`.
pub fn torus_delta(a: f64, b: f64, l: f64) -> f64 {
    let d = b - a;
    d - l * (d / l).round()
}

pub fn torus_distance(p: (f64, f64), q: (f64, f64), l: f64) -> f64 {
    torus_delta(p.0, q.0, l).hypot(torus_delta(p.1, q.1, l))
}

/// Circular mean `atan2(mean sin, mean cos)` in `[0, 2π)`. The flag is true
/// when the resultant vanishes and the mean is undefined (returned as 0).
pub fn angular_mean(headings: &[f64]) -> Result<(f64, bool), ParamError> {
    check(!headings.is_empty(), "headings", "angular mean of an empty list")?;
    let n = headings.len() as f64;
    let s = headings.iter().map(|h| h.sin()).sum::<f64>() / n;
    let c = headings.iter().map(|h| h.cos()).sum::<f64>() / n;
    if s.hypot(c) < 1e-12 {
        return Ok((0.0, true));
    }
    Ok((normalize_angle(s.atan2(c)), false))
}

/// Neighbors within the radius (ascending ids) and the nearest other point.
#[derive(Clone, Debug, PartialEq)]
pub struct Neighborhood {
    pub within: Vec<usize>,
    pub closest: Option<(usize, f64)>,
}

/// Uniform bucket grid over the torus with cells no smaller than the radius.
#[derive(Clone, Debug)]
struct SpatialGrid {
    l: f64,
    cells: usize,
    cell: f64,
    buckets: Vec<Vec<u32>>,
}

impl SpatialGrid {
    fn new(l: f64, r: f64) -> Self {
        let cells = ((l / r).floor() as usize).max(1);
        SpatialGrid { l, cells, cell: l / cells as f64, buckets: vec![Vec::new(); cells * cells] }
    }

    /// Below three cells per axis the 3x3 stencil would repeat cells.
    fn usable(&self) -> bool {
        self.cells >= 3
    }

    fn coords(&self, p: (f64, f64)) -> (usize, usize) {
        let c = |v: f64| ((v / self.cell) as usize).min(self.cells - 1);
        (c(p.0), c(p.1))
    }

    fn bucket(&self, cx: usize, cy: usize) -> usize {
        cy * self.cells + cx
    }

    fn insert(&mut self, id: u32, p: (f64, f64)) {
        let (cx, cy) = self.coords(p);
        let b = self.bucket(cx, cy);
        self.buckets[b].push(id);
    }

    fn remove(&mut self, id: u32, p: (f64, f64)) {
        let (cx, cy) = self.coords(p);
        let b = self.bucket(cx, cy);
        if let Some(k) = self.buckets[b].iter().position(|&x| x == id) {
            self.buckets[b].swap_remove(k);
        }
    }

    fn offset(&self, c: usize, d: isize) -> usize {
        (c as isize + d).rem_euclid(self.cells as isize) as usize
    }

    /// Ids in the 3x3 block of cells around `p`.
    fn near(&self, p: (f64, f64), out: &mut Vec<u32>) {
        let (cx, cy) = self.coords(p);
        for dy in -1..=1 {
            for dx in -1..=1 {
                out.extend_from_slice(&self.buckets[self.bucket(self.offset(cx, dx), self.offset(cy, dy))]);
            }
        }
    }

    /// Ids in cells at Chebyshev ring distance exactly `k` from `p`'s cell.
    fn ring(&self, p: (f64, f64), k: isize, out: &mut Vec<u32>) {
        let (cx, cy) = self.coords(p);
        for dy in -k..=k {
            for dx in -k..=k {
                if dx.abs() != k && dy.abs() != k {
                    continue;
                }
                out.extend_from_slice(&self.buckets[self.bucket(self.offset(cx, dx), self.offset(cy, dy))]);
            }
        }
    }
}

fn closer(best: Option<(usize, f64)>, j: usize, d: f64) -> bool {
    match best {
        None => true,
        Some((bj, bd)) => d < bd || (d == bd && j < bj),
    }
}

fn brute_closest(positions: &[(f64, f64)], i: usize, l: f64) -> Option<(usize, f64)> {
    let mut best = None;
    for (j, &q) in positions.iter().enumerate() {
        if j != i {
            let d = torus_distance(positions[i], q, l);
            if closer(best, j, d) {
                best = Some((j, d));
            }
        }
    }
    best
}

/// Nearest other point by ring search, falling back to a full scan once
/// rings would wrap around the torus.
fn grid_closest(grid: &SpatialGrid, positions: &[(f64, f64)], i: usize) -> Option<(usize, f64)> {
    if !grid.usable() {
        return brute_closest(positions, i, grid.l);
    }
    let p = positions[i];
    let mut best = None;
    let mut buf = Vec::new();
    let mut k = 0isize;
    loop {
        if (2 * k + 1) as usize > grid.cells {
            return brute_closest(positions, i, grid.l);
        }
        buf.clear();
        grid.ring(p, k, &mut buf);
        for &j in &buf {
            let j = j as usize;
            if j != i {
                let d = torus_distance(p, positions[j], grid.l);
                if closer(best, j, d) {
                    best = Some((j, d));
                }
            }
        }
        // anything in ring k+1 is at least k cells away
        if let Some((_, d)) = best {
            if d < k as f64 * grid.cell {
                return best;
            }
        }
        k += 1;
    }
}

fn grid_within(grid: &SpatialGrid, positions: &[(f64, f64)], i: usize, r: f64, buf: &mut Vec<u32>) -> Vec<usize> {
    let p = positions[i];
    let mut out: Vec<usize> = if grid.usable() {
        buf.clear();
        grid.near(p, buf);
        buf.iter().map(|&j| j as usize).filter(|&j| j != i && torus_distance(p, positions[j], grid.l) <= r).collect()
    } else {
        (0..positions.len()).filter(|&j| j != i && torus_distance(p, positions[j], grid.l) <= r).collect()
    };
    out.sort_unstable();
    out
}

/// For every point: the others within distance `r` and the nearest other
/// point (regardless of `r`), under periodic boundaries.
pub fn radius_neighbors(positions: &[(f64, f64)], r: f64, l: f64) -> Vec<Neighborhood> {
    let mut grid = SpatialGrid::new(l, r);
    for (i, &p) in positions.iter().enumerate() {
        grid.insert(i as u32, p);
    }
    let mut buf = Vec::new();
    (0..positions.len())
        .map(|i| Neighborhood {
            within: grid_within(&grid, positions, i, r, &mut buf),
            closest: grid_closest(&grid, positions, i),
        })
        .collect()
}

/// Connected components of an undirected graph, each sorted, ordered by
/// smallest member.
pub fn components(adjacency: &[Vec<u32>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, nbrs) in adjacency.iter().enumerate() {
        for &j in nbrs {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Cluster statistics. Distances are averaged over clusters with at least
/// two members; both are 0 when every bird is alone.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSummary {
    pub n_clusters: usize,
    pub sizes: Vec<usize>,
    pub mean_size: f64,
    /// Mean over clusters of the average pairwise distance.
    pub intra_avg_dist: f64,
    /// Mean over clusters of the largest pairwise distance.
    pub intra_complete_dist: f64,
}

pub fn cluster_summary(clusters: &[Vec<usize>], positions: &[(f64, f64)], l: f64) -> ClusterSummary {
    let sizes: Vec<usize> = clusters.iter().map(Vec::len).collect();
    let n = sizes.iter().sum::<usize>();
    let (mut avg_sum, mut max_sum, mut multi) = (0.0, 0.0, 0usize);
    for c in clusters.iter().filter(|c| c.len() >= 2) {
        let (mut total, mut max, mut pairs) = (0.0f64, 0.0f64, 0usize);
        for (a, &i) in c.iter().enumerate() {
            for &j in &c[a + 1..] {
                let d = torus_distance(positions[i], positions[j], l);
                total += d;
                max = max.max(d);
                pairs += 1;
            }
        }
        avg_sum += total / pairs as f64;
        max_sum += max;
        multi += 1;
    }
    let per = |s: f64| if multi == 0 { 0.0 } else { s / multi as f64 };
    ClusterSummary {
        n_clusters: clusters.len(),
        mean_size: if clusters.is_empty() { 0.0 } else { n as f64 / clusters.len() as f64 },
        sizes,
        intra_avg_dist: per(avg_sum),
        intra_complete_dist: per(max_sum),
    }
}

// ---- birds ----

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestBird {
    pub id: ModelId,
    pub position: (f64, f64),
    pub heading: f64,
    pub distance: f64,
}

/// What one bird is told about its surroundings.
#[derive(Clone, Debug, PartialEq)]
pub struct FlockView {
    pub closest: Option<ClosestBird>,
    /// Flock-mates within the visibility radius, ascending.
    pub neighbors: Vec<ModelId>,
    /// Mean minimum-image displacement to the flock-mates.
    pub center_offset: Option<(f64, f64)>,
    /// Flock-mates' center of mass, wrapped onto the grid.
    pub center_of_mass: Option<(f64, f64)>,
    pub mean_heading: Option<f64>,
    pub n_clusters: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BirdUp {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub super_cohesion: bool,
}

impl fmt::Display for BirdUp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.x, self.y, self.heading)?;
        if self.super_cohesion {
            f.write_str(",super")?;
        }
        Ok(())
    }
}

/// Rule applied in the last internal transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Advance,
    Separate,
    Flock,
    AntiCohesion,
    SuperCohesion,
}

#[derive(Clone, Debug)]
pub struct Bird {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    params: Arc<BoidsParams>,
    super_ticks: u32,
    activations_left: u32,
    next_duration: u32,
    armed: bool,
    last_branch: Branch,
    last_turn: f64,
}

/// Turns `heading` toward `target` by at most `bound` radians.
fn turn_toward(heading: f64, target: f64, bound: f64) -> f64 {
    angle_diff(target, heading).clamp(-bound, bound)
}

impl Bird {
    pub fn new(x: f64, y: f64, heading: f64, params: Arc<BoidsParams>) -> Self {
        Bird {
            x,
            y,
            heading: normalize_angle(heading),
            super_ticks: 0,
            activations_left: params.ba_activations,
            next_duration: params.ba_duration,
            armed: true,
            params,
            last_branch: Branch::Advance,
            last_turn: 0.0,
        }
    }

    pub fn last_branch(&self) -> Branch {
        self.last_branch
    }

    /// Absolute heading change of the last internal transition, in radians.
    pub fn last_turn(&self) -> f64 {
        self.last_turn
    }

    pub fn super_ticks(&self) -> u32 {
        self.super_ticks
    }

    pub fn activations_left(&self) -> u32 {
        self.activations_left
    }

    fn advance(&mut self) {
        let l = self.params.grid_size;
        self.x = wrap(self.x + self.params.velocity * self.heading.cos(), l);
        self.y = wrap(self.y + self.params.velocity * self.heading.sin(), l);
    }

    /// Heading change (before bounding by the caller) chosen for this step.
    fn steer(&mut self, view: &FlockView) -> f64 {
        let params = self.params.clone();
        let p = &*params;
        let Some(closest) = view.closest else {
            self.last_branch = Branch::Advance;
            return 0.0;
        };
        if closest.distance < p.min_dist {
            self.last_branch = Branch::Separate;
            let l = p.grid_size;
            let bearing = torus_delta(self.y, closest.position.1, l).atan2(torus_delta(self.x, closest.position.0, l));
            return turn_toward(self.heading, bearing + PI, p.separation_turn.to_radians());
        }
        if p.variant == Variant::Ba && self.super_ticks == 0 {
            // a new period needs the count to have dropped to the threshold since the last one
            if view.n_clusters <= p.ba_threshold {
                self.armed = true;
            } else if self.armed && self.activations_left > 0 {
                self.super_ticks = self.next_duration.max(1);
                self.activations_left -= 1;
                self.next_duration = (self.next_duration as f64 * p.ba_decay).round() as u32;
                self.armed = false;
            }
        }
        let cohesion_bearing = view.center_offset.filter(|o| o.0 != 0.0 || o.1 != 0.0).map(|o| o.1.atan2(o.0));
        if p.variant == Variant::Fa && view.n_clusters > p.fa_threshold {
            self.last_branch = Branch::AntiCohesion;
            return cohesion_bearing.map_or(0.0, |b| -turn_toward(self.heading, b, p.cohesion_turn.to_radians()));
        }
        let mut cohesion_bound = p.cohesion_turn.to_radians();
        self.last_branch = Branch::Flock;
        if self.super_ticks > 0 {
            cohesion_bound *= p.ba_cohesion_factor;
            self.last_branch = Branch::SuperCohesion;
        }
        let mut h = self.heading;
        if let Some(mean) = view.mean_heading {
            h += turn_toward(h, mean, p.alignment_turn.to_radians());
        }
        if let Some(b) = cohesion_bearing {
            h += turn_toward(h, b, cohesion_bound);
        }
        h - self.heading
    }
}

impl Atomic for Bird {
    type Message = Null;
    type Up = BirdUp;
    type View = FlockView;

    fn time_advance(&self) -> SimTime {
        SimTime::from_f64(1.0)
    }

    fn internal(&mut self, view: Option<&FlockView>) -> Result<Option<BirdUp>, ModelError> {
        let turn = match view {
            Some(v) => self.steer(v),
            None => {
                self.last_branch = Branch::Advance;
                0.0
            }
        };
        self.last_turn = turn.abs();
        self.heading = normalize_angle(self.heading + turn);
        self.advance();
        let super_cohesion = self.last_branch == Branch::SuperCohesion;
        if super_cohesion {
            self.super_ticks -= 1;
        }
        Ok(Some(BirdUp { x: self.x, y: self.y, heading: self.heading, super_cohesion }))
    }

    fn external(&mut self, _e: SimTime, x: &Null, _view: Option<&FlockView>) -> Result<Option<BirdUp>, ModelError> {
        match *x {}
    }

    fn output(&self) -> Option<Null> {
        None
    }

    fn describe(&self) -> String {
        format!("{},{},{}", self.x, self.y, self.heading)
    }
}

// ---- global state ----

/// Component label per vertex, maintained under single-vertex edge updates.
///
/// When a vertex loses edges, a breadth-first search from it that stops as
/// soon as every lost neighbor is reached usually settles connectivity after
/// touching a handful of vertices; only real splits and merges relabel whole
/// components.
#[derive(Clone, Debug)]
struct ComponentLabels {
    label: Vec<u32>,
    sizes: Vec<usize>,
    free: Vec<u32>,
    count: usize,
    stamp: Vec<u32>,
    epoch: u32,
}

impl ComponentLabels {
    fn new(adjacency: &[Vec<u32>]) -> Self {
        let n = adjacency.len();
        let mut labels =
            ComponentLabels { label: vec![u32::MAX; n], sizes: Vec::new(), free: Vec::new(), count: 0, stamp: vec![0; n], epoch: 0 };
        let all: Vec<u32> = (0..n as u32).collect();
        labels.relabel(adjacency, &all);
        labels
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Whether every vertex in `targets` is reachable from `from`.
    fn reaches_all(&mut self, adjacency: &[Vec<u32>], from: u32, targets: &[u32]) -> bool {
        let epoch = self.next_epoch();
        let mut left = targets.len();
        let mut queue = VecDeque::from([from]);
        self.stamp[from as usize] = epoch;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v as usize] {
                if self.stamp[w as usize] != epoch {
                    self.stamp[w as usize] = epoch;
                    if targets.contains(&w) {
                        left -= 1;
                        if left == 0 {
                            return true;
                        }
                    }
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Gives a fresh label to the whole component of every seed vertex.
    fn relabel(&mut self, adjacency: &[Vec<u32>], seeds: &[u32]) {
        let epoch = self.next_epoch();
        let mut comp = Vec::new();
        for &s in seeds {
            if self.stamp[s as usize] == epoch {
                continue;
            }
            comp.clear();
            comp.push(s);
            self.stamp[s as usize] = epoch;
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &w in &adjacency[v as usize] {
                    if self.stamp[w as usize] != epoch {
                        self.stamp[w as usize] = epoch;
                        comp.push(w);
                    }
                }
            }
            let fresh = self.free.pop().unwrap_or_else(|| {
                self.sizes.push(0);
                (self.sizes.len() - 1) as u32
            });
            for &v in &comp {
                let old = self.label[v as usize];
                if old != u32::MAX {
                    self.sizes[old as usize] -= 1;
                    if self.sizes[old as usize] == 0 {
                        self.count -= 1;
                        self.free.push(old);
                    }
                }
                self.label[v as usize] = fresh;
            }
            self.sizes[fresh as usize] = comp.len();
            self.count += 1;
        }
    }

    /// `v` lost the edges to `removed` and gained the edges to `added`;
    /// `adjacency` already reflects both.
    fn update(&mut self, adjacency: &[Vec<u32>], v: u32, removed: &[u32], added: &[u32]) {
        let split = !removed.is_empty() && !self.reaches_all(adjacency, v, removed);
        let merge = added.iter().any(|&w| self.label[w as usize] != self.label[v as usize]);
        if split || merge {
            let seeds: Vec<u32> = std::iter::once(v).chain(removed.iter().copied()).chain(added.iter().copied()).collect();
            self.relabel(adjacency, &seeds);
        }
    }

    fn groups(&self) -> Vec<Vec<usize>> {
        let mut slot = vec![usize::MAX; self.sizes.len()];
        let mut groups: Vec<Vec<usize>> = Vec::with_capacity(self.count);
        for (v, &l) in self.label.iter().enumerate() {
            let l = l as usize;
            if slot[l] == usize::MAX {
                slot[l] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[l]].push(v);
        }
        groups
    }
}

/// Positions, headings and the proximity graph of the whole flock.
#[derive(Clone, Debug)]
pub struct FlockGlobal {
    l: f64,
    r: f64,
    positions: Vec<(f64, f64)>,
    headings: Vec<f64>,
    super_cohesion: Vec<bool>,
    grid: SpatialGrid,
    adjacency: Vec<Vec<u32>>,
    labels: ComponentLabels,
    variant: Variant,
    fa_threshold: usize,
}

impl FlockGlobal {
    pub fn new(positions: Vec<(f64, f64)>, headings: Vec<f64>, params: &BoidsParams) -> Self {
        let (l, r) = (params.grid_size, params.radius);
        let mut grid = SpatialGrid::new(l, r);
        for (i, &p) in positions.iter().enumerate() {
            grid.insert(i as u32, p);
        }
        let mut buf = Vec::new();
        let adjacency: Vec<Vec<u32>> = (0..positions.len())
            .map(|i| grid_within(&grid, &positions, i, r, &mut buf).into_iter().map(|j| j as u32).collect())
            .collect();
        let labels = ComponentLabels::new(&adjacency);
        FlockGlobal {
            l,
            r,
            super_cohesion: vec![false; positions.len()],
            positions,
            headings,
            grid,
            adjacency,
            labels,
            variant: params.variant,
            fa_threshold: params.fa_threshold,
        }
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn headings(&self) -> &[f64] {
        &self.headings
    }

    /// Flock-mates of bird `i` within the radius, ascending.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    /// Connected components of the proximity graph, each sorted, ordered by
    /// smallest member.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        self.labels.groups()
    }

    pub fn n_clusters(&self) -> usize {
        self.labels.count
    }

    pub fn summary(&self) -> ClusterSummary {
        cluster_summary(&self.clusters(), &self.positions, self.l)
    }

    /// FA: anti-cohesion in force. BA: some bird in super-cohesion.
    pub fn event_active(&self) -> bool {
        match self.variant {
            Variant::Vanilla => false,
            Variant::Fa => self.n_clusters() > self.fa_threshold,
            Variant::Ba => self.super_cohesion.iter().any(|&s| s),
        }
    }

    fn relocate(&mut self, i: usize, p: (f64, f64)) {
        self.grid.remove(i as u32, self.positions[i]);
        self.positions[i] = p;
        self.grid.insert(i as u32, p);
        let mut buf = Vec::new();
        let new: Vec<u32> =
            grid_within(&self.grid, &self.positions, i, self.r, &mut buf).into_iter().map(|j| j as u32).collect();
        let old = std::mem::take(&mut self.adjacency[i]);
        if old == new {
            self.adjacency[i] = new;
            return;
        }
        let id = i as u32;
        let removed: Vec<u32> = old.iter().copied().filter(|j| new.binary_search(j).is_err()).collect();
        let added: Vec<u32> = new.iter().copied().filter(|j| old.binary_search(j).is_err()).collect();
        for &j in &removed {
            let list = &mut self.adjacency[j as usize];
            if let Ok(k) = list.binary_search(&id) {
                list.remove(k);
            }
        }
        for &j in &added {
            let list = &mut self.adjacency[j as usize];
            if let Err(k) = list.binary_search(&id) {
                list.insert(k, id);
            }
        }
        self.adjacency[i] = new;
        self.labels.update(&self.adjacency, id, &removed, &added);
    }
}

impl GlobalState for FlockGlobal {
    type Up = BirdUp;
    type View = FlockView;
    type GlobalUp = Null;
    type ParentView = Null;

    fn view(&self, child: ModelId) -> Option<FlockView> {
        let i = child.index();
        if i >= self.positions.len() {
            return None;
        }
        let closest = grid_closest(&self.grid, &self.positions, i).map(|(j, d)| ClosestBird {
            id: ModelId(j as u32),
            position: self.positions[j],
            heading: self.headings[j],
            distance: d,
        });
        let nbrs = &self.adjacency[i];
        let (mut center_offset, mut center_of_mass, mut mean_heading) = (None, None, None);
        if !nbrs.is_empty() {
            let p = self.positions[i];
            let k = nbrs.len() as f64;
            let (dx, dy) = nbrs.iter().fold((0.0, 0.0), |(sx, sy), &j| {
                let q = self.positions[j as usize];
                (sx + torus_delta(p.0, q.0, self.l), sy + torus_delta(p.1, q.1, self.l))
            });
            center_offset = Some((dx / k, dy / k));
            center_of_mass = Some((wrap(p.0 + dx / k, self.l), wrap(p.1 + dy / k, self.l)));
            let hs: Vec<f64> = nbrs.iter().map(|&j| self.headings[j as usize]).collect();
            mean_heading = match angular_mean(&hs) {
                Ok((m, false)) => Some(m),
                _ => None,
            };
        }
        Some(FlockView {
            closest,
            neighbors: nbrs.iter().map(|&j| ModelId(j)).collect(),
            center_offset,
            center_of_mass,
            mean_heading,
            n_clusters: self.n_clusters(),
        })
    }

    fn transition(&mut self, _elapsed: SimTime, bag: &[(ModelId, BirdUp)], _parent: Option<&Null>) -> Result<Option<Null>, ModelError> {
        for (id, up) in bag {
            let i = id.index();
            if i >= self.positions.len() {
                return Err(ModelError::Invariant(format!("position from unknown bird {id}")));
            }
            self.relocate(i, (up.x, up.y));
            self.headings[i] = up.heading;
            self.super_cohesion[i] = up.super_cohesion;
        }
        Ok(None)
    }

    fn describe(&self) -> String {
        let edges = self.adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        format!("clusters={} edges={edges}", self.n_clusters())
    }
}

pub type BoidsModel = Coupled<Null, BirdUp, FlockView>;

/// Uniform initial positions and headings for one replication.
pub fn initial_flock(params: &BoidsParams, seed: u64, stream: u64) -> Result<Vec<(f64, f64, f64)>, ParamError> {
    params.validate()?;
    let mut rng = RngStream::new(seed, stream);
    let l = params.grid_size;
    Ok((0..params.n_birds)
        .map(|_| (rng.random_range(0.0..l), rng.random_range(0.0..l), rng.random_range(0.0..TAU)))
        .collect())
}

pub fn build_from(params: &BoidsParams, flock: &[(f64, f64, f64)]) -> Result<BoidsModel, ParamError> {
    params.validate()?;
    check(flock.len() == params.n_birds, "n_birds", format!("initial flock has {} birds", flock.len()))?;
    let shared = Arc::new(params.clone());
    let positions = flock.iter().map(|&(x, y, _)| (x, y)).collect();
    let headings = flock.iter().map(|&(_, _, h)| normalize_angle(h)).collect();
    let name = match params.variant {
        Variant::Vanilla => "boids",
        Variant::Fa => "boids-fa",
        Variant::Ba => "boids-ba",
    };
    let mut model: BoidsModel = Coupled::new(name)
        .with_couplings(CouplingTable::new())
        .with_global(FlockGlobal::new(positions, headings, params));
    for (i, &(x, y, h)) in flock.iter().enumerate() {
        model.add_atomic(i as u32, Bird::new(x, y, h, shared.clone()));
    }
    Ok(model)
}

pub fn build(params: &BoidsParams, seed: u64, stream: u64) -> Result<BoidsModel, ParamError> {
    build_from(params, &initial_flock(params, seed, stream)?)
}
