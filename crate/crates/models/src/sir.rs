//! SIR epidemic on a configuration-model network (SIR-CM), and the variant
//! where susceptible agents refuse infection while the infected compartment
//! grows fast (SIR-CM-V).
//!
//! Each agent is an atomic model. An infected agent runs an exponential race
//! between infecting a neighbor (rate `k·β`, `k` its degree) and recovering
//! (rate `γ`). The global state counts compartments from the agents'
//! up-messages and, in the vaccination variant, exposes the growth rate of
//! the infected count over the last two completed time bins.

use std::fmt;
use std::sync::Arc;

use ebdevs::stochastic::{configuration_model, race_winner, DegreeGraph, DegreeSpec, RngStream};
use ebdevs::{Atomic, Coupled, Couplings, Endpoint, GlobalState, ModelError, ModelId, Null, SimTime};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{check, positive, ParamError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SirParams {
    pub n: usize,
    pub beta: f64,
    pub gamma: f64,
    pub gamma_shape: f64,
    pub gamma_scale: f64,
    pub initial_infected: f64,
    pub vaccination: bool,
    /// Susceptible agents refuse infection once the growth rate reaches this.
    pub threshold: f64,
    pub bin_width: f64,
}

impl Default for SirParams {
    fn default() -> Self {
        SirParams {
            n: 500,
            beta: 0.05,
            gamma: 0.1,
            gamma_shape: 10.0,
            gamma_scale: 1.0,
            initial_infected: 0.1,
            vaccination: false,
            threshold: 3.0,
            bin_width: 1.0,
        }
    }
}

impl SirParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check(self.n >= 2, "n", format!("need at least 2 agents, got {}", self.n))?;
        positive(self.beta, "beta")?;
        positive(self.gamma, "gamma")?;
        positive(self.gamma_shape, "gamma_shape")?;
        positive(self.gamma_scale, "gamma_scale")?;
        positive(self.bin_width, "bin_width")?;
        check(self.threshold.is_finite(), "threshold", "must be finite")?;
        check(
            (0.0..=1.0).contains(&self.initial_infected),
            "initial_infected",
            format!("must be a fraction in [0, 1], got {}", self.initial_infected),
        )
    }

    pub fn initial_infected_count(&self) -> usize {
        let k = (self.n as f64 * self.initial_infected).round() as usize;
        if self.initial_infected > 0.0 {
            k.max(1)
        } else {
            0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Compartment {
    Susceptible,
    /// Susceptible agent that decided to avoid infection.
    Vaccinated,
    Infected,
    Recovered,
}

impl Compartment {
    pub fn label(self) -> &'static str {
        match self {
            Compartment::Susceptible => "S",
            Compartment::Vaccinated => "Sv",
            Compartment::Infected => "I",
            Compartment::Recovered => "R",
        }
    }
}

impl fmt::Display for Compartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Infection attempt aimed at one neighbor.
#[derive(Clone, Debug, PartialEq)]
pub struct Infect {
    pub from: ModelId,
    pub target: ModelId,
}

impl fmt::Display for Infect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "infect:{}->{}", self.from, self.target)
    }
}

pub struct SirAgent {
    id: ModelId,
    state: Compartment,
    neighbors: Vec<ModelId>,
    beta: f64,
    gamma: f64,
    threshold: f64,
    /// Time left in the current infected sojourn.
    sojourn: SimTime,
    target: Option<ModelId>,
    rng: RngStream,
}

impl SirAgent {
    pub fn new(
        id: ModelId,
        state: Compartment,
        neighbors: Vec<ModelId>,
        params: &SirParams,
        rng: RngStream,
    ) -> Result<Self, ParamError> {
        let mut agent = SirAgent {
            id,
            state,
            neighbors,
            beta: params.beta,
            gamma: params.gamma,
            threshold: params.threshold,
            sojourn: SimTime::INFINITY,
            target: None,
            rng,
        };
        if state == Compartment::Infected {
            agent.race()?;
        }
        Ok(agent)
    }

    pub fn state(&self) -> Compartment {
        self.state
    }

    /// Samples the next race: returns whether the infection clock wins, and
    /// sets the sojourn and the neighbor to aim at.
    fn race(&mut self) -> Result<bool, ModelError> {
        let k = self.neighbors.len() as f64;
        let (infects, time) = if self.neighbors.is_empty() {
            let (_, t) = race_winner(&mut self.rng, &[self.gamma]).map_err(kernel)?;
            (false, t)
        } else {
            let (i, t) = race_winner(&mut self.rng, &[k * self.beta, self.gamma]).map_err(kernel)?;
            (i == 0, t)
        };
        self.sojourn = time;
        self.target = if self.neighbors.is_empty() {
            None
        } else {
            Some(self.neighbors[self.rng.random_range(0..self.neighbors.len())])
        };
        Ok(infects)
    }

    fn become_infected(&mut self) -> Result<(), ModelError> {
        self.state = Compartment::Infected;
        self.race()?;
        Ok(())
    }
}

fn kernel(e: ebdevs::KernelError) -> ModelError {
    ModelError::Invariant(e.to_string())
}

impl Atomic for SirAgent {
    type Message = Infect;
    type Up = Compartment;
    type View = f64;

    fn time_advance(&self) -> SimTime {
        match self.state {
            Compartment::Infected => self.sojourn,
            _ => SimTime::INFINITY,
        }
    }

    fn internal(&mut self, _view: Option<&f64>) -> Result<Option<Compartment>, ModelError> {
        if self.state != Compartment::Infected {
            return Err(ModelError::Invariant(format!("agent {} scheduled while {}", self.id, self.state)));
        }
        // The winner of this race decides whether the agent stays infected;
        // the time of the same draw is the next sojourn.
        let stays = self.race()?;
        if !stays {
            self.state = Compartment::Recovered;
            self.sojourn = SimTime::INFINITY;
            self.target = None;
        }
        Ok(Some(self.state))
    }

    fn external(&mut self, e: SimTime, _x: &Infect, view: Option<&f64>) -> Result<Option<Compartment>, ModelError> {
        match self.state {
            Compartment::Susceptible => match view {
                Some(&growth) if growth >= self.threshold => self.state = Compartment::Vaccinated,
                _ => self.become_infected()?,
            },
            Compartment::Infected => self.sojourn = self.sojourn - e,
            Compartment::Vaccinated | Compartment::Recovered => {}
        }
        Ok(Some(self.state))
    }

    fn output(&self) -> Option<Infect> {
        match self.state {
            Compartment::Infected => self.target.map(|target| Infect { from: self.id, target }),
            _ => None,
        }
    }

    fn describe(&self) -> String {
        self.state.label().to_string()
    }
}

/// Compartment counts plus the binned growth rate of the infected count.
#[derive(Clone, Debug)]
pub struct SirGlobal {
    labels: Vec<Compartment>,
    n_s: usize,
    n_i: usize,
    n_r: usize,
    n_vaccinated: usize,
    vaccination: bool,
    threshold: f64,
    bin_width: f64,
    clock: f64,
    bin: u64,
    /// Infected count at the end of the last two completed bins, oldest first.
    history: [Option<usize>; 2],
    growth: f64,
}

impl SirGlobal {
    pub fn new(labels: Vec<Compartment>, params: &SirParams) -> Self {
        let count = |c| labels.iter().filter(|&&l| l == c).count();
        let n_vaccinated = count(Compartment::Vaccinated);
        SirGlobal {
            n_s: count(Compartment::Susceptible) + n_vaccinated,
            n_i: count(Compartment::Infected),
            n_r: count(Compartment::Recovered),
            n_vaccinated,
            labels,
            vaccination: params.vaccination,
            threshold: params.threshold,
            bin_width: params.bin_width,
            clock: 0.0,
            bin: 0,
            history: [None, None],
            growth: 0.0,
        }
    }

    /// `(nS, nI, nR)`; vaccinated agents are counted as susceptible.
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.n_s, self.n_i, self.n_r)
    }

    pub fn vaccinated(&self) -> usize {
        self.n_vaccinated
    }

    pub fn population(&self) -> usize {
        self.labels.len()
    }

    /// Agents that were ever infected.
    pub fn cumulative_infections(&self) -> usize {
        self.n_i + self.n_r
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn outbreak_active(&self) -> bool {
        self.growth >= self.threshold
    }

    fn close_bins(&mut self) {
        let bin = (self.clock / self.bin_width).floor() as u64;
        // the count was constant since the last call, so at most two closures matter
        for _ in 0..bin.saturating_sub(self.bin).min(2) {
            self.history = [self.history[1], Some(self.n_i)];
        }
        self.bin = bin.max(self.bin);
        if let [Some(a), Some(b)] = self.history {
            self.growth = (b as f64 - a as f64) / self.bin_width;
        }
    }

    fn apply(&mut self, id: ModelId, next: Compartment) -> Result<(), ModelError> {
        use Compartment::*;
        let slot = self
            .labels
            .get_mut(id.index())
            .ok_or_else(|| ModelError::Invariant(format!("up-message from unknown agent {id}")))?;
        let prev = *slot;
        if prev == next {
            return Ok(());
        }
        match (prev, next) {
            (Susceptible, Infected) => {
                self.n_s -= 1;
                self.n_i += 1;
            }
            (Susceptible, Vaccinated) => self.n_vaccinated += 1,
            (Infected, Recovered) => {
                self.n_i -= 1;
                self.n_r += 1;
            }
            _ => return Err(ModelError::Invariant(format!("agent {id}: illegal transition {prev} -> {next}"))),
        }
        *slot = next;
        Ok(())
    }
}

impl GlobalState for SirGlobal {
    type Up = Compartment;
    type View = f64;
    type GlobalUp = Null;
    type ParentView = Null;

    fn view(&self, _child: ModelId) -> Option<f64> {
        self.vaccination.then_some(self.growth)
    }

    fn transition(
        &mut self,
        elapsed: SimTime,
        bag: &[(ModelId, Compartment)],
        _parent: Option<&Null>,
    ) -> Result<Option<Null>, ModelError> {
        self.clock += elapsed.value();
        self.close_bins();
        for &(id, c) in bag {
            self.apply(id, c)?;
        }
        if self.n_s + self.n_i + self.n_r != self.labels.len() {
            return Err(ModelError::Invariant(format!(
                "counts {} + {} + {} do not add up to {}",
                self.n_s,
                self.n_i,
                self.n_r,
                self.labels.len()
            )));
        }
        Ok(None)
    }

    fn describe(&self) -> String {
        format!(
            "S={} I={} R={} Sv={} growth={}",
            self.n_s, self.n_i, self.n_r, self.n_vaccinated, self.growth
        )
    }
}

/// Routes each infection attempt to its target only.
pub struct SirCouplings {
    graph: Arc<DegreeGraph>,
}

impl Couplings<Infect> for SirCouplings {
    fn links(&self) -> Vec<(Endpoint, Endpoint)> {
        (0..self.graph.n())
            .flat_map(|i| {
                self.graph
                    .neighbors(i)
                    .iter()
                    .map(move |&j| (Endpoint::Child(ModelId(i as u32)), Endpoint::Child(ModelId(j as u32))))
            })
            .collect()
    }

    fn route(&self, _from: Endpoint, msg: &Infect, out: &mut Vec<(Endpoint, Infect)>) {
        out.push((Endpoint::Child(msg.target), msg.clone()));
    }
}

pub type SirModel = Coupled<Infect, Compartment, f64>;

/// Network and initial condition of one replication.
#[derive(Clone, Debug)]
pub struct SirSetup {
    pub graph: Arc<DegreeGraph>,
    pub initial: Vec<Compartment>,
}

impl SirSetup {
    pub fn sample(params: &SirParams, seed: u64, stream: u64) -> Result<Self, ParamError> {
        params.validate()?;
        let root = RngStream::new(seed, stream);
        let mut graph_rng = root.fork(u64::MAX);
        let spec = DegreeSpec::Gamma { shape: params.gamma_shape, scale: params.gamma_scale };
        let degrees = ebdevs::stochastic::degrees(&mut graph_rng, params.n, &spec)?;
        let graph = configuration_model(&mut graph_rng, &degrees)?;
        Self::with_graph(params, graph, seed, stream)
    }

    /// Uses the given network and draws only the initially infected agents.
    pub fn with_graph(params: &SirParams, graph: DegreeGraph, seed: u64, stream: u64) -> Result<Self, ParamError> {
        params.validate()?;
        check(graph.n() == params.n, "n", format!("graph has {} nodes", graph.n()))?;
        let mut rng = RngStream::new(seed, stream).fork(u64::MAX - 1);
        let mut initial = vec![Compartment::Susceptible; params.n];
        for i in sample(&mut rng, params.n, params.initial_infected_count()) {
            initial[i] = Compartment::Infected;
        }
        Ok(SirSetup { graph: Arc::new(graph), initial })
    }

    pub fn build(&self, params: &SirParams, seed: u64, stream: u64) -> Result<SirModel, ParamError> {
        let root = RngStream::new(seed, stream);
        let name = if params.vaccination { "sir-cm-v" } else { "sir-cm" };
        let mut model: SirModel = Coupled::new(name)
            .with_couplings(SirCouplings { graph: self.graph.clone() })
            .with_global(SirGlobal::new(self.initial.clone(), params));
        for (i, &c) in self.initial.iter().enumerate() {
            let neighbors = self.graph.neighbors(i).iter().map(|&j| ModelId(j as u32)).collect();
            let id = ModelId(i as u32);
            model.add_atomic(id, SirAgent::new(id, c, neighbors, params, root.fork(i as u64))?);
        }
        Ok(model)
    }
}

/// Samples a replication and builds its coupled model.
pub fn build(params: &SirParams, seed: u64, stream: u64) -> Result<SirModel, ParamError> {
    SirSetup::sample(params, seed, stream)?.build(params, seed, stream)
}

/// One row of the mean-field reference solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdePoint {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

/// Classical well-mixed SIR system `S' = -βSI/N`, `I' = βSI/N - γI`,
/// `R' = γI`, integrated with fixed-step RK4.
pub fn sir_ode(beta: f64, gamma: f64, n: f64, s0: f64, i0: f64, horizon: f64, step: f64) -> Result<Vec<OdePoint>, ParamError> {
    positive(step, "step")?;
    positive(n, "n")?;
    check(horizon >= 0.0, "horizon", "must be non-negative")?;
    let f = |s: f64, i: f64| {
        let inf = beta * s * i / n;
        (-inf, inf - gamma * i, gamma * i)
    };
    let mut p = OdePoint { t: 0.0, s: s0, i: i0, r: n - s0 - i0 };
    let steps = (horizon / step).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(p);
    for k in 1..=steps {
        let h = step;
        let k1 = f(p.s, p.i);
        let k2 = f(p.s + h / 2.0 * k1.0, p.i + h / 2.0 * k1.1);
        let k3 = f(p.s + h / 2.0 * k2.0, p.i + h / 2.0 * k2.1);
        let k4 = f(p.s + h * k3.0, p.i + h * k3.1);
        p = OdePoint {
            t: k as f64 * h,
            s: p.s + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            i: p.i + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
            r: p.r + h / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
        };
        out.push(p);
    }
    Ok(out)
}
