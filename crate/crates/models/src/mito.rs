//! Mitochondrial fusion and fission inside a 2-D cell.
//!
//! The cell is an annulus around the nucleus; mitochondria closer to the
//! nucleus than `r_peri` move slower. Every `cycle_period` seconds each
//! active mitochondrion either tries to split (fission) or to absorb its
//! closest eligible neighbor (fusion), never both. The structure is fixed:
//! a pool of atomic models, of which only the active ones carry mass.
//!
//! The global state owns the registry of status, position and mass. Fission
//! grants are assigned to the lowest inactive id; the granted model adopts
//! its new identity the next time it wakes. Inactive models wake half a
//! second after each cycle tick, so every grant of a tick is picked up
//! before anything moves again.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use ebdevs::stochastic::RngStream;
use ebdevs::{Atomic, Coupled, CouplingTable, GlobalState, ModelError, ModelId, Null, SimTime};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{check, positive, ParamError};

/// Fixed motion step, in seconds.
pub const STEP: f64 = 1.0;
/// Offset after a cycle tick at which inactive models wake up.
const WAKE_OFFSET: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MitoParams {
    pub fission_p: f64,
    pub fusion_p: f64,
    pub total_mass: f64,
    pub m_min: f64,
    pub m_max: f64,
    pub cycle_period: f64,
    pub r_nuc: f64,
    pub r_peri: f64,
    pub r_cell: f64,
    /// Speed range (μm/s) in the perinuclear band.
    pub peri_speed: (f64, f64),
    /// Speed range (μm/s) in the cytosol.
    pub cyto_speed: (f64, f64),
    /// Number of atomic models; defaults to `total_mass / m_min`.
    pub pool: Option<usize>,
}

impl Default for MitoParams {
    fn default() -> Self {
        MitoParams {
            fission_p: 0.5,
            fusion_p: 0.5,
            total_mass: 300.0,
            m_min: 0.5,
            m_max: 3.0,
            cycle_period: 300.0,
            r_nuc: 5.0,
            r_peri: 10.0,
            r_cell: 20.0,
            peri_speed: (0.0, 0.2),
            cyto_speed: (0.0, 0.5),
            pool: None,
        }
    }
}

impl MitoParams {
    /// The three probability scenarios, as `(fission_p, fusion_p)`.
    pub const SCENARIOS: [(f64, f64); 3] = [(0.2, 0.8), (0.5, 0.5), (0.8, 0.2)];

    pub fn scenario(fission_p: f64, fusion_p: f64) -> Self {
        MitoParams { fission_p, fusion_p, ..MitoParams::default() }
    }

    pub fn pool_size(&self) -> usize {
        self.pool.unwrap_or((self.total_mass / self.m_min).floor() as usize)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        check(prob(self.fission_p), "fission_p", format!("must be in [0, 1], got {}", self.fission_p))?;
        check(prob(self.fusion_p), "fusion_p", format!("must be in [0, 1], got {}", self.fusion_p))?;
        check(
            self.fission_p + self.fusion_p <= 1.0 + 1e-12,
            "fusion_p",
            "fission and fusion bands are disjoint, so the probabilities must sum to at most 1",
        )?;
        positive(self.m_min, "m_min")?;
        check(self.m_max >= 2.0 * self.m_min, "m_max", "must be at least twice m_min")?;
        positive(self.total_mass, "total_mass")?;
        check(self.total_mass >= self.m_min, "total_mass", "smaller than one mitochondrion")?;
        check(
            self.cycle_period >= STEP && self.cycle_period.fract() == 0.0,
            "cycle_period",
            format!("must be a whole number of seconds, got {}", self.cycle_period),
        )?;
        positive(self.r_nuc, "r_nuc")?;
        check(
            self.r_nuc < self.r_peri && self.r_peri < self.r_cell && self.r_cell.is_finite(),
            "r_peri",
            format!("need r_nuc < r_peri < r_cell, got {} {} {}", self.r_nuc, self.r_peri, self.r_cell),
        )?;
        for (name, (lo, hi)) in [("peri_speed", self.peri_speed), ("cyto_speed", self.cyto_speed)] {
            check(lo >= 0.0 && lo <= hi && hi.is_finite(), name, format!("bad range ({lo}, {hi})"))?;
            // a step longer than the annulus could jump over the nucleus
            check(hi * STEP < (self.r_cell - self.r_nuc) / 2.0, name, "step longer than half the annulus")?;
        }
        let pool = self.pool_size();
        check(pool >= 1, "pool", "empty pool")?;
        check(
            pool as f64 * self.m_max >= self.total_mass,
            "pool",
            format!("{pool} models cannot hold {} at most {} each", self.total_mass, self.m_max),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Perinuclear,
    Cytosolic,
}

/// Perinuclear iff the radial distance is in `(r_nuc, r_peri]`.
pub fn region_of(x: f64, y: f64, p: &MitoParams) -> Result<Region, ModelError> {
    let r = x.hypot(y);
    if !inside(x, y, p) {
        return Err(ModelError::Invariant(format!("position ({x}, {y}) at radius {r} is outside the cytoplasm")));
    }
    Ok(if r <= p.r_peri { Region::Perinuclear } else { Region::Cytosolic })
}

fn inside(x: f64, y: f64, p: &MitoParams) -> bool {
    let r = x.hypot(y);
    r > p.r_nuc && r <= p.r_cell
}

/// One motion step: fresh heading, region-dependent speed, and on crossing a
/// boundary the opposite direction. If that fails too the mitochondrion
/// stays put (both directions can only leave the cell near a tangent).
pub fn mito_move<R: Rng + ?Sized>(x: f64, y: f64, p: &MitoParams, rng: &mut R) -> Result<(f64, f64, f64), ModelError> {
    let (lo, hi) = match region_of(x, y, p)? {
        Region::Perinuclear => p.peri_speed,
        Region::Cytosolic => p.cyto_speed,
    };
    let heading = rng.random_range(0.0..TAU);
    let speed = if hi > lo { rng.random_range(lo..hi) } else { lo };
    for h in [heading, (heading + std::f64::consts::PI) % TAU] {
        let (nx, ny) = (x + speed * STEP * h.cos(), y + speed * STEP * h.sin());
        if inside(nx, ny, p) {
            return Ok((nx, ny, h));
        }
    }
    Ok((x, y, heading))
}

/// Splits `mass` into `(m1, m2)` with `m1 = (x_f·(0.5 − m_min/mass) + m_min/mass)·mass`
/// and `m2 = mass − m1`. `m1` is recomputed from `m2` so that `m1 + m2`
/// reproduces `mass` exactly in floating point.
pub fn fission_split(mass: f64, x_f: f64, m_min: f64) -> Result<(f64, f64), ModelError> {
    if !(mass >= 2.0 * m_min) || !(0.0..=1.0).contains(&x_f) {
        return Err(ModelError::Invariant(format!("cannot split mass {mass} with x_f {x_f} (m_min {m_min})")));
    }
    let ratio = m_min / mass;
    let m1 = ((x_f * (0.5 - ratio) + ratio) * mass).clamp(m_min, mass / 2.0);
    // m2 >= mass/2, so mass - m2 is exact
    let m2 = mass - m1;
    let m1 = mass - m2;
    if m1 < m_min {
        return Ok((m_min, mass - m_min));
    }
    Ok((m1, m2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SizeGroup {
    Small,
    Medium,
    Large,
}

/// Small iff mass ≤ 1, medium iff 1 < mass ≤ 2, large iff 2 < mass ≤ 3.
pub fn size_group(mass: f64, p: &MitoParams) -> Result<SizeGroup, ModelError> {
    if !(p.m_min..=p.m_max).contains(&mass) {
        return Err(ModelError::Invariant(format!("mass {mass} outside [{}, {}]", p.m_min, p.m_max)));
    }
    Ok(if mass <= 1.0 {
        SizeGroup::Small
    } else if mass <= 2.0 {
        SizeGroup::Medium
    } else {
        SizeGroup::Large
    })
}

// ---- registry ----

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub active: bool,
    pub x: f64,
    pub y: f64,
    pub mass: f64,
    /// Bumped on every activation; lets a model notice that its id was reused.
    pub generation: u32,
    /// Time of the cycle tick at which this id last took part in an event.
    acted_at: f64,
}

impl Entry {
    pub fn active(x: f64, y: f64, mass: f64) -> Self {
        Entry { active: true, x, y, mass, generation: 1, acted_at: f64::NAN }
    }

    pub fn vacant() -> Self {
        Entry { active: false, x: 0.0, y: 0.0, mass: 0.0, generation: 0, acted_at: f64::NAN }
    }

    fn took_part(&self, t: f64) -> bool {
        self.acted_at == t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partner {
    pub id: ModelId,
    pub mass: f64,
    pub distance: f64,
}

/// Read-only handle on the registry given to each mitochondrion.
#[derive(Clone, Debug)]
pub struct MitoView {
    registry: Arc<Vec<Entry>>,
}

impl MitoView {
    pub fn entry(&self, id: ModelId) -> Option<&Entry> {
        self.registry.get(id.index())
    }

    /// Closest active mitochondrion that has not yet taken part in an event
    /// at tick `t`. Ties go to the lower id.
    pub fn closest_partner(&self, id: ModelId, t: f64) -> Option<Partner> {
        let me = self.entry(id)?;
        let mut best: Option<Partner> = None;
        for (j, e) in self.registry.iter().enumerate() {
            if j == id.index() || !e.active || e.took_part(t) {
                continue;
            }
            let d = (e.x - me.x).hypot(e.y - me.y);
            if best.is_none_or(|b| d < b.distance) {
                best = Some(Partner { id: ModelId(j as u32), mass: e.mass, distance: d });
            }
        }
        best
    }
}

impl fmt::Display for MitoView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "registry[{}]", self.registry.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MitoEvent {
    Fission { child_mass: f64 },
    Fusion { absorbed: ModelId, absorbed_mass: f64 },
}

/// Status report sent up after every transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MitoUp {
    pub active: bool,
    pub x: f64,
    pub y: f64,
    pub mass: f64,
    pub generation: u32,
    pub event: Option<MitoEvent>,
}

impl fmt::Display for MitoUp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.active {
            return f.write_str("inactive");
        }
        write!(f, "{},{},{}", self.x, self.y, self.mass)?;
        match self.event {
            Some(MitoEvent::Fission { child_mass }) => write!(f, ",fission:{child_mass}"),
            Some(MitoEvent::Fusion { absorbed, absorbed_mass }) => write!(f, ",fusion:{absorbed}:{absorbed_mass}"),
            None => Ok(()),
        }
    }
}

// ---- atomic ----

pub struct Mito {
    id: ModelId,
    active: bool,
    x: f64,
    y: f64,
    heading: f64,
    mass: f64,
    generation: u32,
    /// Current simulation time; the model has no inputs, so it can keep its
    /// own clock by summing its time advances.
    clock: f64,
    rng: RngStream,
    params: Arc<MitoParams>,
}

impl Mito {
    pub fn active(id: ModelId, x: f64, y: f64, mass: f64, params: Arc<MitoParams>, rng: RngStream) -> Self {
        Mito { id, active: true, x, y, heading: 0.0, mass, generation: 1, clock: 0.0, rng, params }
    }

    pub fn inactive(id: ModelId, params: Arc<MitoParams>, rng: RngStream) -> Self {
        Mito { id, active: false, x: 0.0, y: 0.0, heading: 0.0, mass: 0.0, generation: 0, clock: 0.0, rng, params }
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    fn is_tick(&self) -> bool {
        self.clock > 0.0 && self.clock % self.params.cycle_period == 0.0
    }

    fn next_wake(&self) -> f64 {
        let p = self.params.cycle_period;
        if self.active {
            (self.clock / STEP).floor() * STEP + STEP
        } else {
            (((self.clock - WAKE_OFFSET) / p).floor() + 1.0).max(1.0) * p + WAKE_OFFSET
        }
    }

    /// Adopts whatever the registry says about this id: deactivation after
    /// being absorbed, or a fresh identity after a fission grant.
    fn sync(&mut self, view: Option<&MitoView>) -> Result<(), ModelError> {
        let Some(entry) = view.and_then(|v| v.entry(self.id)) else {
            return Err(ModelError::Invariant(format!("mitochondrion {} has no registry entry", self.id)));
        };
        if entry.active && entry.generation != self.generation {
            (self.active, self.x, self.y, self.mass, self.generation) = (true, entry.x, entry.y, entry.mass, entry.generation);
        } else if !entry.active && self.active {
            self.active = false;
            self.mass = 0.0;
        }
        Ok(())
    }

    fn cycle_event(&mut self, view: &MitoView) -> Result<Option<MitoEvent>, ModelError> {
        let p = self.params.clone();
        let u: f64 = self.rng.random();
        if u <= p.fission_p {
            if self.mass < 2.0 * p.m_min {
                return Ok(None);
            }
            let x_f: f64 = self.rng.random();
            let (m1, m2) = fission_split(self.mass, x_f, p.m_min)?;
            self.mass = m1;
            return Ok(Some(MitoEvent::Fission { child_mass: m2 }));
        }
        if u <= p.fission_p + p.fusion_p {
            if let Some(partner) = view.closest_partner(self.id, self.clock) {
                if self.mass + partner.mass <= p.m_max {
                    self.mass += partner.mass;
                    return Ok(Some(MitoEvent::Fusion { absorbed: partner.id, absorbed_mass: partner.mass }));
                }
            }
        }
        Ok(None)
    }

    fn report(&self, event: Option<MitoEvent>) -> MitoUp {
        MitoUp { active: self.active, x: self.x, y: self.y, mass: self.mass, generation: self.generation, event }
    }
}

impl Atomic for Mito {
    type Message = Null;
    type Up = MitoUp;
    type View = MitoView;

    fn time_advance(&self) -> SimTime {
        SimTime::from_f64(self.next_wake() - self.clock)
    }

    fn internal(&mut self, view: Option<&MitoView>) -> Result<Option<MitoUp>, ModelError> {
        self.clock = self.next_wake();
        let before = (self.active, self.generation);
        self.sync(view)?;
        let view = view.expect("checked by sync");
        let mut event = None;
        // a model activated, reused or absorbed just now sits out until its next wake-up
        if self.active && before == (true, self.generation) {
            if self.is_tick() {
                event = self.cycle_event(view)?;
            } else {
                let params = self.params.clone();
                (self.x, self.y, self.heading) = mito_move(self.x, self.y, &params, &mut self.rng)?;
            }
        }
        Ok(Some(self.report(event)))
    }

    fn external(&mut self, _e: SimTime, _x: &Null, _v: Option<&MitoView>) -> Result<Option<MitoUp>, ModelError> {
        Ok(None)
    }

    fn output(&self) -> Option<Null> {
        None
    }

    fn describe(&self) -> String {
        if self.active {
            format!("{},{},{}", self.x, self.y, self.mass)
        } else {
            "inactive".to_string()
        }
    }
}

// ---- global ----

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Census {
    pub small: usize,
    pub medium: usize,
    pub large: usize,
    pub total_mass: f64,
}

impl Census {
    pub fn active(&self) -> usize {
        self.small + self.medium + self.large
    }

    /// Fractions `(small, medium, large)` of the active population.
    pub fn fractions(&self) -> (f64, f64, f64) {
        let n = self.active().max(1) as f64;
        (self.small as f64 / n, self.medium as f64 / n, self.large as f64 / n)
    }
}

#[derive(Clone, Debug)]
pub struct CellGlobal {
    registry: Arc<Vec<Entry>>,
    inactive: BTreeSet<u32>,
    params: Arc<MitoParams>,
    clock: f64,
    fissions: u64,
    fusions: u64,
}

impl CellGlobal {
    pub fn new(entries: Vec<Entry>, params: Arc<MitoParams>) -> Self {
        let inactive = entries.iter().enumerate().filter(|(_, e)| !e.active).map(|(i, _)| i as u32).collect();
        CellGlobal { registry: Arc::new(entries), inactive, params, clock: 0.0, fissions: 0, fusions: 0 }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.registry
    }

    pub fn n_active(&self) -> usize {
        self.registry.len() - self.inactive.len()
    }

    pub fn n_inactive(&self) -> usize {
        self.inactive.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.registry.iter().filter(|e| e.active).map(|e| e.mass).sum()
    }

    pub fn fissions(&self) -> u64 {
        self.fissions
    }

    pub fn fusions(&self) -> u64 {
        self.fusions
    }

    pub fn census(&self) -> Result<Census, ModelError> {
        let mut c = Census::default();
        for e in self.registry.iter().filter(|e| e.active) {
            match size_group(e.mass, &self.params)? {
                SizeGroup::Small => c.small += 1,
                SizeGroup::Medium => c.medium += 1,
                SizeGroup::Large => c.large += 1,
            }
            c.total_mass += e.mass;
        }
        Ok(c)
    }

    fn apply(&mut self, id: ModelId, up: &MitoUp) -> Result<(), ModelError> {
        let now = self.clock;
        let i = id.index();
        let reg = Arc::make_mut(&mut self.registry);
        let entry = reg.get(i).copied().ok_or_else(|| ModelError::Invariant(format!("report from unknown {id}")))?;
        if up.generation != entry.generation || up.active != entry.active {
            return Err(ModelError::Invariant(format!("stale report from {id}: {up}")));
        }
        if !up.active {
            return Ok(());
        }
        let took_part = |e: &Entry, who: ModelId| {
            if e.took_part(now) {
                Err(ModelError::Invariant(format!("{who} takes part in two events at t={now}")))
            } else {
                Ok(())
            }
        };
        let mismatch = || ModelError::Invariant(format!("mass of {id} changed from {} to {}", entry.mass, up.mass));
        reg[i].x = up.x;
        reg[i].y = up.y;
        match up.event {
            None => {
                if up.mass != entry.mass {
                    return Err(mismatch());
                }
            }
            Some(MitoEvent::Fission { child_mass }) => {
                took_part(&entry, id)?;
                if up.mass + child_mass != entry.mass {
                    return Err(mismatch());
                }
                let Some(j) = self.inactive.pop_first() else {
                    return Err(ModelError::Capacity(format!(
                        "fission of {id} at t={now} needs an inactive model but all {} are active",
                        reg.len()
                    )));
                };
                reg[i].mass = up.mass;
                reg[i].acted_at = now;
                let child = &mut reg[j as usize];
                *child = Entry {
                    active: true,
                    x: up.x,
                    y: up.y,
                    mass: child_mass,
                    generation: child.generation + 1,
                    acted_at: now,
                };
                self.fissions += 1;
            }
            Some(MitoEvent::Fusion { absorbed, absorbed_mass }) => {
                took_part(&entry, id)?;
                let other = reg
                    .get(absorbed.index())
                    .copied()
                    .filter(|o| o.active && o.mass == absorbed_mass && absorbed != id)
                    .ok_or_else(|| ModelError::Invariant(format!("{id} absorbs {absorbed}, which is not available")))?;
                took_part(&other, absorbed)?;
                if up.mass != entry.mass + absorbed_mass {
                    return Err(mismatch());
                }
                reg[i].mass = up.mass;
                reg[i].acted_at = now;
                let gone = &mut reg[absorbed.index()];
                gone.active = false;
                gone.mass = 0.0;
                gone.acted_at = now;
                self.inactive.insert(absorbed.0);
                self.fusions += 1;
            }
        }
        if !(self.params.m_min..=self.params.m_max).contains(&up.mass) {
            return Err(ModelError::Invariant(format!("mass {} of {id} out of bounds", up.mass)));
        }
        Ok(())
    }
}

impl GlobalState for CellGlobal {
    type Up = MitoUp;
    type View = MitoView;
    type GlobalUp = Null;
    type ParentView = Null;

    fn view(&self, _child: ModelId) -> Option<MitoView> {
        Some(MitoView { registry: self.registry.clone() })
    }

    fn transition(
        &mut self,
        elapsed: SimTime,
        bag: &[(ModelId, MitoUp)],
        _parent: Option<&Null>,
    ) -> Result<Option<Null>, ModelError> {
        self.clock += elapsed.value();
        for (id, up) in bag {
            self.apply(*id, up)?;
        }
        Ok(None)
    }

    fn describe(&self) -> String {
        format!("active={} fissions={} fusions={}", self.n_active(), self.fissions, self.fusions)
    }
}

pub type MitoModel = Coupled<Null, MitoUp, MitoView>;

/// Initial `(x, y, mass)` of the active mitochondria: masses uniform in
/// `[m_min, m_max]` until the total is reached, positions uniform over the
/// annulus.
pub fn initial_population(params: &MitoParams, seed: u64, stream: u64) -> Result<Vec<(f64, f64, f64)>, ParamError> {
    params.validate()?;
    let mut rng = RngStream::new(seed, stream).fork(u64::MAX);
    let p = params;
    let mut out = Vec::new();
    let mut remaining = p.total_mass;
    while remaining > 0.0 {
        let mass = if remaining <= p.m_max {
            remaining
        } else {
            // keep the remainder either zero or at least m_min
            let hi = p.m_max.min(remaining - p.m_min);
            if hi > p.m_min {
                rng.random_range(p.m_min..=hi)
            } else {
                p.m_min
            }
        };
        let (x, y) = loop {
            let (x, y) = (rng.random_range(-p.r_cell..=p.r_cell), rng.random_range(-p.r_cell..=p.r_cell));
            if inside(x, y, p) {
                break (x, y);
            }
        };
        out.push((x, y, mass));
        remaining -= mass;
        if remaining < p.m_min {
            // rounding dust from the subtraction above
            break;
        }
    }
    check(
        out.len() <= p.pool_size(),
        "pool",
        format!("{} initial mitochondria exceed the pool of {}", out.len(), p.pool_size()),
    )?;
    Ok(out)
}

pub fn build(params: &MitoParams, seed: u64, stream: u64) -> Result<MitoModel, ParamError> {
    let population = initial_population(params, seed, stream)?;
    let params = Arc::new(params.clone());
    let root = RngStream::new(seed, stream);
    let mut entries = Vec::with_capacity(params.pool_size());
    let mut model: MitoModel = Coupled::new("mito").with_couplings(CouplingTable::new());
    for i in 0..params.pool_size() {
        let id = ModelId(i as u32);
        let rng = root.fork(i as u64);
        match population.get(i) {
            Some(&(x, y, mass)) => {
                entries.push(Entry::active(x, y, mass));
                model.add_atomic(id, Mito::active(id, x, y, mass, params.clone(), rng));
            }
            None => {
                entries.push(Entry::vacant());
                model.add_atomic(id, Mito::inactive(id, params.clone(), rng));
            }
        }
    }
    Ok(model.with_global(CellGlobal::new(entries, params)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        for x_f in [0.0, 0.3, 1.0] {
            assert_eq!(fission_split(1.0, x_f, 0.5).unwrap(), (0.5, 0.5));
        }
        assert_eq!(fission_split(2.0, 0.0, 0.5).unwrap(), (0.5, 1.5));
        assert_eq!(fission_split(2.0, 1.0, 0.5).unwrap(), (1.0, 1.0));
        assert!(fission_split(0.9, 0.5, 0.5).is_err());
    }

    #[test]
    fn regions_and_groups() {
        let p = MitoParams::default();
        assert_eq!(region_of(5.0 + 1e-9, 0.0, &p).unwrap(), Region::Perinuclear);
        assert_eq!(region_of(0.0, 10.0, &p).unwrap(), Region::Perinuclear);
        assert_eq!(region_of(20.0 - 1e-9, 0.0, &p).unwrap(), Region::Cytosolic);
        assert!(region_of(1.0, 1.0, &p).is_err());
        assert!(region_of(20.5, 0.0, &p).is_err());
        assert_eq!(size_group(1.0, &p).unwrap(), SizeGroup::Small);
        assert_eq!(size_group(1.0 + 1e-12, &p).unwrap(), SizeGroup::Medium);
        assert_eq!(size_group(2.0, &p).unwrap(), SizeGroup::Medium);
        assert_eq!(size_group(3.0, &p).unwrap(), SizeGroup::Large);
        assert!(size_group(3.1, &p).is_err());
    }

    #[test]
    fn zero_speed_stays_put_and_nucleus_reflects() {
        let mut p = MitoParams { peri_speed: (0.0, 0.0), ..MitoParams::default() };
        let mut rng = RngStream::new(1, 0);
        let (x, y, _) = mito_move(6.0, 0.0, &p, &mut rng).unwrap();
        assert_eq!((x, y), (6.0, 0.0));
        // every heading with a negative x component would enter the nucleus
        p.peri_speed = (2.0, 2.0);
        for _ in 0..200 {
            let (x, y, _) = mito_move(5.5, 0.0, &p, &mut rng).unwrap();
            assert!(x.hypot(y) > p.r_nuc);
        }
    }

    #[test]
    fn initial_population_sums_to_total() {
        let p = MitoParams::default();
        for seed in 0..20 {
            let pop = initial_population(&p, seed, 0).unwrap();
            let total: f64 = pop.iter().map(|m| m.2).sum();
            assert!((total - 300.0).abs() < 1e-9, "{total}");
            assert!(pop.iter().all(|&(x, y, m)| inside(x, y, &p) && (0.5..=3.0).contains(&m)));
        }
    }

    fn at_tick(params: MitoParams, mass: f64, partner_mass: f64) -> (Mito, MitoUp, CellGlobal) {
        let p = Arc::new(params);
        let global = CellGlobal::new(
            vec![Entry::active(8.0, 0.0, mass), Entry::active(8.0, 1.0, partner_mass), Entry::vacant()],
            p.clone(),
        );
        let mut m = Mito::active(ModelId(0), 8.0, 0.0, mass, p, RngStream::new(3, 0));
        m.clock = 299.0;
        let up = m.internal(global.view(ModelId(0)).as_ref()).unwrap().unwrap();
        (m, up, global)
    }

    #[test]
    fn tick_fission_publishes_the_grant() {
        let (m, up, mut g) = at_tick(MitoParams::scenario(1.0, 0.0), 2.4, 1.0);
        let Some(MitoEvent::Fission { child_mass }) = up.event else { panic!("{up}") };
        assert_eq!(m.mass() + child_mass, 2.4);
        assert_eq!((m.position(), m.is_active()), ((8.0, 0.0), true));
        g.transition(SimTime::from_f64(300.0), &[(ModelId(0), up)], None).unwrap();
        assert_eq!(g.entries()[2].mass, child_mass);
        assert_eq!((g.n_active(), g.total_mass()), (3, 3.4));
    }

    #[test]
    fn tick_fusion_respects_the_mass_cap() {
        let (m, up, _) = at_tick(MitoParams::scenario(0.0, 1.0), 2.0, 1.2);
        assert_eq!((up.event, m.mass()), (None, 2.0));
        let (m, up, mut g) = at_tick(MitoParams::scenario(0.0, 1.0), 2.0, 1.0);
        assert_eq!(up.event, Some(MitoEvent::Fusion { absorbed: ModelId(1), absorbed_mass: 1.0 }));
        assert_eq!(m.mass(), 3.0);
        g.transition(SimTime::from_f64(300.0), &[(ModelId(0), up)], None).unwrap();
        assert_eq!((g.n_active(), g.total_mass()), (1, 3.0));
    }

    #[test]
    fn off_tick_is_a_pure_move() {
        let p = Arc::new(MitoParams::default());
        let global = CellGlobal::new(vec![Entry::active(8.0, 0.0, 1.0)], p.clone());
        let mut m = Mito::active(ModelId(0), 8.0, 0.0, 1.0, p, RngStream::new(3, 0));
        m.clock = 149.0;
        let up = m.internal(global.view(ModelId(0)).as_ref()).unwrap().unwrap();
        assert_eq!((up.event, up.mass), (None, 1.0));
        assert_ne!(m.position(), (8.0, 0.0));
    }

    #[test]
    fn wake_schedule() {
        let p = Arc::new(MitoParams::default());
        let mut m = Mito::inactive(ModelId(0), p.clone(), RngStream::new(0, 0));
        assert_eq!(m.next_wake(), 300.5);
        m.clock = 300.0;
        assert_eq!(m.next_wake(), 300.5);
        m.clock = 300.5;
        assert_eq!(m.next_wake(), 600.5);
        m.active = true;
        assert_eq!(m.next_wake(), 301.0);
    }
}
