//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::HashMap;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ebdevs::stochastic::stats::{ks_p_value, ks_statistic};
use ebdevs::stochastic::{race_winner, RngStream};
use ebdevs::{
    classic_lift, ClassicAtomic, Coupled, CouplingTable, Endpoint, EventKind, ModelId, Null, SimError, SimTime,
    Simulation,
};
use ebdevs_harness::aggregate::Series;
use ebdevs_harness::config::{Experiment, ExperimentConfig, TraceMode};
use ebdevs_harness::gallery::{run_replication, ModelSpec, RunSettings, MODELS};
use ebdevs_harness::verify::verify_equivalence;
use ebdevs_models::boids::{components, radius_neighbors, BoidsParams, FlockGlobal};
use ebdevs_models::mito::{fission_split, MitoParams};
use ebdevs_models::sir::{self, SirGlobal, SirParams};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn t(v: f64) -> SimTime {
    SimTime::from_f64(v)
}

fn experiment(model: &str, seed: u64, reps: u32) -> Experiment {
    ExperimentConfig { model: Some(model.into()), seed: Some(seed), replications: Some(reps), ..Default::default() }
        .resolve()
        .unwrap()
}

fn completed(exp: &Experiment) -> Vec<Series> {
    exp.run_in_memory().into_iter().map(|r| r.result.unwrap()).collect()
}

// ---- 1 ----

fn determinism() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (name, _) in MODELS {
        let start = Instant::now();
        let mut bytes = Vec::new();
        for dir in &dirs {
            let mut exp = experiment(name, 42, 1);
            exp.trace = TraceMode::Full;
            exp.out = dir.path().to_path_buf();
            exp.run_to_disk().unwrap();
            let trace = dir.path().join(format!("{name}_seed42_rep000_trace.csv"));
            let series = dir.path().join(format!("{name}_seed42_rep000.csv"));
            bytes.push((std::fs::read(trace).unwrap(), std::fs::read(series).unwrap()));
        }
        let elapsed = start.elapsed();
        let same = bytes[0] == bytes[1] && !bytes[0].0.is_empty();
        pass &= same && elapsed < Duration::from_secs(60);
        details.push(format!("{name} {} lines {:.1}s", bytes[0].0.iter().filter(|&&b| b == b'\n').count(), elapsed.as_secs_f64()));
    }
    outcome(pass, details.join(", "))
}

// ---- 2 ----

#[derive(Clone, Debug, PartialEq)]
enum Job {
    Job(u32),
    Done(u32),
}

impl fmt::Display for Job {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Job::Job(k) => write!(f, "job{k}"),
            Job::Done(k) => write!(f, "done{k}"),
        }
    }
}

struct Generator(u32);

impl ClassicAtomic for Generator {
    type Message = Job;
    fn time_advance(&self) -> SimTime {
        t(2.0)
    }
    fn internal(&mut self) {
        self.0 += 1;
    }
    fn external(&mut self, _e: SimTime, _x: &Job) {}
    fn output(&self) -> Option<Job> {
        Some(Job::Job(self.0))
    }
    fn describe(&self) -> String {
        format!("next={}", self.0)
    }
}

/// Single slot, service time 2; arrivals while busy are dropped.
struct Server {
    busy: Option<u32>,
    sigma: SimTime,
    dropped: u32,
}

impl ClassicAtomic for Server {
    type Message = Job;
    fn time_advance(&self) -> SimTime {
        self.sigma
    }
    fn internal(&mut self) {
        self.busy = None;
        self.sigma = SimTime::INFINITY;
    }
    fn external(&mut self, e: SimTime, x: &Job) {
        if let Job::Job(k) = x {
            if self.busy.is_none() {
                self.busy = Some(*k);
                self.sigma = t(2.0);
            } else {
                self.dropped += 1;
                self.sigma = self.sigma - e;
            }
        }
    }
    fn output(&self) -> Option<Job> {
        self.busy.map(Job::Done)
    }
    fn describe(&self) -> String {
        match self.busy {
            Some(k) => format!("busy({k}) dropped={}", self.dropped),
            None => format!("idle dropped={}", self.dropped),
        }
    }
}

struct Sink(u32);

impl ClassicAtomic for Sink {
    type Message = Job;
    fn time_advance(&self) -> SimTime {
        SimTime::INFINITY
    }
    fn internal(&mut self) {}
    fn external(&mut self, _e: SimTime, x: &Job) {
        if matches!(x, Job::Done(_)) {
            self.0 += 1;
        }
    }
    fn output(&self) -> Option<Job> {
        None
    }
    fn describe(&self) -> String {
        format!("count={}", self.0)
    }
}

fn classic_compatibility() -> Outcome {
    let c = |i| Endpoint::Child(ModelId(i));
    let mut m: Coupled<Job, Null, Null> =
        Coupled::new("shop").with_couplings(CouplingTable::new().couple(c(0), c(1)).couple(c(1), c(2)));
    m.add_atomic(0, classic_lift(Generator(1)))
        .add_atomic(1, classic_lift(Server { busy: None, sigma: SimTime::INFINITY, dropped: 0 }))
        .add_atomic(2, classic_lift(Sink(0)));
    let mut sim = Simulation::new(m).unwrap().with_memory_trace();
    sim.initialize(t(0.0)).unwrap();
    sim.run_until(t(8.0)).unwrap();
    let got: Vec<String> = sim
        .take_trace()
        .iter()
        .filter(|r| r.kind != EventKind::Init)
        .map(|r| format!("{} {} {} {}{}", r.time.value(), r.model_path, r.kind, r.state, r.output))
        .collect();
    // Hand calendar: the generator fires every 2; the server (service 2)
    // finishes exactly when the next job arrives, and since the generator has
    // the lower id that job finds the server busy and is dropped.
    let expected = [
        "2 shop/0 output job1",
        "2 shop/0 internal next=2",
        "2 shop/1 external busy(1) dropped=0",
        "4 shop/0 output job2",
        "4 shop/0 internal next=3",
        "4 shop/1 external busy(1) dropped=1",
        "4 shop/1 output done1",
        "4 shop/1 internal idle dropped=1",
        "4 shop/2 external count=1",
        "6 shop/0 output job3",
        "6 shop/0 internal next=4",
        "6 shop/1 external busy(3) dropped=1",
        "8 shop/0 output job4",
        "8 shop/0 internal next=5",
        "8 shop/1 external busy(3) dropped=2",
        "8 shop/1 output done3",
        "8 shop/1 internal idle dropped=2",
        "8 shop/2 external count=2",
    ];
    let pass = got == expected;
    let detail = if pass {
        format!("{} events match the hand calendar", got.len())
    } else {
        format!("got {got:?}")
    };
    outcome(pass, detail)
}

// ---- 3, 4 ----

const CLOSURE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn small_sir() -> SirParams {
    SirParams { n: 10, ..SirParams::default() }
}

/// Trace records other than initialization.
fn sir_events(seed: u64) -> usize {
    let mut sim = Simulation::new(sir::build(&small_sir(), seed, 0).unwrap()).unwrap().with_memory_trace();
    sim.initialize(t(0.0)).unwrap();
    sim.run_until(SimTime::INFINITY).unwrap();
    sim.take_trace().iter().filter(|r| r.kind != EventKind::Init).count()
}

fn closure_under_coupling() -> Outcome {
    let checks = verify_equivalence(&ModelSpec::Sir(small_sir()), &CLOSURE_SEEDS, f64::INFINITY).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for c in &checks {
        let events = sir_events(c.seed);
        pass &= c.flatten.equivalent && events >= 50;
        details.push(format!("seed {}: {} events {}", c.seed, events, if c.flatten.equivalent { "equal" } else { "DIFFERENT" }));
    }
    outcome(pass, details.join(", "))
}

fn bisimulation() -> Outcome {
    let checks = verify_equivalence(&ModelSpec::Sir(small_sir()), &CLOSURE_SEEDS, f64::INFINITY).unwrap();
    let pass = checks.iter().all(|c| c.lower.equivalent);
    let details: Vec<String> = checks
        .iter()
        .map(|c| format!("seed {}: {} obs {}", c.seed, c.lower.compared, if c.lower.equivalent { "equal" } else { "DIFFERENT" }))
        .collect();
    outcome(pass, details.join(", "))
}

// ---- 5 ----

#[derive(Clone, Debug, PartialEq)]
struct Ball;

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ball")
    }
}

struct Player(bool);

impl ClassicAtomic for Player {
    type Message = Ball;
    fn time_advance(&self) -> SimTime {
        if self.0 {
            SimTime::ZERO
        } else {
            SimTime::INFINITY
        }
    }
    fn internal(&mut self) {
        self.0 = false;
    }
    fn external(&mut self, _e: SimTime, _x: &Ball) {
        self.0 = true;
    }
    fn output(&self) -> Option<Ball> {
        self.0.then_some(Ball)
    }
    fn describe(&self) -> String {
        self.0.to_string()
    }
}

fn legitimacy() -> Outcome {
    let c = |i| Endpoint::Child(ModelId(i));
    let mut m: Coupled<Ball, Null, Null> =
        Coupled::new("pp").with_couplings(CouplingTable::new().couple(c(0), c(1)).couple(c(1), c(0)));
    m.add_atomic(0, classic_lift(Player(true))).add_atomic(1, classic_lift(Player(false)));
    let budget = 1000;
    let mut sim = Simulation::new(m).unwrap().with_legitimacy_budget(budget).with_memory_trace();
    sim.initialize(t(0.0)).unwrap();
    let err = sim.run_until(t(1.0)).unwrap_err();
    let internals = sim.take_trace().iter().filter(|r| r.kind == EventKind::Internal).count() as u64;
    let aborted = matches!(err, SimError::Legitimacy { transitions, time, .. } if transitions == budget && time == t(0.0));
    let mut pass = aborted && internals == budget;
    let mut details = vec![format!("ping-pong aborted after {internals} transitions (budget {budget})")];
    for (name, _) in MODELS {
        let exp = experiment(name, 7, 1);
        let settings = RunSettings { legitimacy_budget: 1_000_000, ..exp.settings() };
        let ok = run_replication(&exp.spec, 7, 0, &settings, None).is_ok();
        pass &= ok;
        details.push(format!("{name} to t={} {}", exp.horizon, if ok { "ok" } else { "ABORTED" }));
    }
    outcome(pass, details.join(", "))
}

// ---- 6 ----

fn exponential_race() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (k, rates) in [vec![0.5, 0.1], vec![1.0, 2.0, 3.0], vec![0.2, 0.2, 0.2, 1.4]].iter().enumerate() {
        let mut rng = RngStream::new(6, k as u64);
        let total: f64 = rates.iter().sum();
        let mut wins = vec![0usize; rates.len()];
        let mut times = Vec::with_capacity(100_000);
        for _ in 0..100_000 {
            let (i, time) = race_winner(&mut rng, rates).unwrap();
            wins[i] += 1;
            times.push(time.value());
        }
        let worst = wins.iter().zip(rates).map(|(&w, r)| (w as f64 / 1e5 - r / total).abs()).fold(0.0, f64::max);
        let d = ks_statistic(&times, |x| 1.0 - (-total * x).exp());
        let p = ks_p_value(d, times.len());
        pass &= worst <= 0.01 && p > 0.01;
        details.push(format!("{rates:?}: max freq error {worst:.4}, KS p={p:.3}"));
    }
    outcome(pass, details.join("; "))
}

// ---- 7, 8, 9 ----

fn sir_conservation() -> Outcome {
    let mut checked = 0u64;
    let mut violations = Vec::new();
    for vaccination in [false, true] {
        let params = SirParams { vaccination, ..SirParams::default() };
        for stream in 0..50 {
            let mut sim = Simulation::new(sir::build(&params, 0, stream).unwrap()).unwrap();
            sim.initialize(t(0.0)).unwrap();
            let (mut s0, _, mut r0) = sim.global::<SirGlobal>().unwrap().counts();
            while sim.step().unwrap().is_some() {
                let (s, i, r) = sim.global::<SirGlobal>().unwrap().counts();
                checked += 1;
                if s + i + r != 500 || s > s0 || r < r0 {
                    violations.push(format!("v={vaccination} stream {stream}: ({s},{i},{r})"));
                }
                (s0, r0) = (s, r);
            }
        }
    }
    let pass = violations.is_empty();
    outcome(pass, format!("{checked} global transitions over 2x50 runs, {} violations {:?}", violations.len(), violations.first()))
}

/// Non-decreasing up to the maximum, non-increasing after it, and the
/// maximum attained on one contiguous run of bins.
fn single_peaked(xs: &[f64]) -> bool {
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let first = xs.iter().position(|&x| x == max).unwrap();
    let last = xs.iter().rposition(|&x| x == max).unwrap();
    xs[..=first].windows(2).all(|w| w[0] <= w[1])
        && xs[first..=last].iter().all(|&x| x == max)
        && xs[last..].windows(2).all(|w| w[0] >= w[1])
}

fn sir_shape() -> Outcome {
    let exp = experiment("sir-cm", 0, 50);
    let reps = exp.run_in_memory();
    let summary = exp.summarize(&reps).unwrap();
    let mean_i = summary.mean_of("nI").unwrap();
    let peak = mean_i.iter().cloned().fold(0.0, f64::max);
    let peak_t = summary.times[mean_i.iter().position(|&x| x == peak).unwrap()];
    let last = *mean_i.last().unwrap();
    let shaped = single_peaked(&mean_i);
    outcome(
        shaped && last < 0.05 * 500.0 && summary.completed == 50,
        format!("peak mean nI {peak:.1} at t={peak_t}, single-peaked {shaped}, final mean nI {last:.2} at t={}", exp.horizon),
    )
}

fn vaccination_effect() -> Outcome {
    let plain = completed(&experiment("sir-cm", 0, 50));
    let vacc = completed(&experiment("sir-cm-v", 0, 50));
    let final_of = |s: &Series, c: &str| s.rows.last().unwrap()[s.column(c).unwrap()];
    let cumulative = |s: &Series| final_of(s, "nI") + final_of(s, "nR");
    let fewer = plain.iter().zip(&vacc).filter(|(p, v)| cumulative(v) <= cumulative(p)).count();
    let mean_r = |runs: &[Series]| runs.iter().map(|s| final_of(s, "nR")).sum::<f64>() / runs.len() as f64;
    let (rp, rv) = (mean_r(&plain), mean_r(&vacc));
    outcome(fewer >= 45 && rv < rp, format!("vaccinated <= plain in {fewer}/50 pairs, mean final nR {rv:.1} vs {rp:.1}"))
}

// ---- 10, 11, 12 ----

fn boids_oracle() -> Outcome {
    let (l, r) = (70.0, 5.0);
    let dist = |p: (f64, f64), q: (f64, f64)| {
        let axis = |a: f64, b: f64| {
            let d = (a - b).abs();
            d.min(l - d)
        };
        axis(p.0, q.0).hypot(axis(p.1, q.1))
    };
    let mut rng = RngStream::new(10, 0);
    let mut mismatches = 0;
    let mut total_clusters = 0;
    for _ in 0..100 {
        let pts: Vec<(f64, f64)> = (0..200).map(|_| (rng.random_range(0.0..l), rng.random_range(0.0..l))).collect();
        let within: Vec<Vec<usize>> =
            (0..200).map(|i| (0..200).filter(|&j| j != i && dist(pts[i], pts[j]) <= r).collect()).collect();
        let mut label = vec![usize::MAX; 200];
        let mut oracle: Vec<Vec<usize>> = Vec::new();
        for s in 0..200 {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = oracle.len();
            let mut group = vec![s];
            let mut k = 0;
            while k < group.len() {
                for &w in &within[group[k]] {
                    if label[w] == usize::MAX {
                        label[w] = oracle.len();
                        group.push(w);
                    }
                }
                k += 1;
            }
            group.sort_unstable();
            oracle.push(group);
        }
        total_clusters += oracle.len();
        let got = radius_neighbors(&pts, r, l);
        for (i, nb) in got.iter().enumerate() {
            let nearest = (0..200).filter(|&j| j != i).min_by(|&a, &b| dist(pts[i], pts[a]).total_cmp(&dist(pts[i], pts[b])));
            let closest_ok = nb.closest.map(|c| c.0) == nearest;
            if nb.within != within[i] || !closest_ok {
                mismatches += 1;
            }
        }
        let adjacency: Vec<Vec<u32>> = got.iter().map(|nb| nb.within.iter().map(|&j| j as u32).collect()).collect();
        if components(&adjacency) != oracle {
            mismatches += 1;
        }
        let global = FlockGlobal::new(pts.clone(), vec![0.0; 200], &BoidsParams::default());
        if global.clusters() != oracle {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("100 snapshots, {total_clusters} clusters in total, {mismatches} mismatches"))
}

fn boids_vanilla_trend() -> Outcome {
    let exp = experiment("boids", 0, 20);
    let summary = exp.summarize(&exp.run_in_memory()).unwrap();
    let at = |col: &str, time: f64| {
        let k = summary.times.iter().position(|&x| x == time).unwrap();
        summary.mean_of(col).unwrap()[k]
    };
    let (c25, c250) = (at("n_clusters", 25.0), at("n_clusters", 250.0));
    let (s25, s250) = (at("mean_cluster_size", 25.0), at("mean_cluster_size", 250.0));
    outcome(
        c250 < 0.6 * c25 && s250 > s25 && summary.completed == 20,
        format!("mean clusters {c25:.2} -> {c250:.2} (ratio {:.3}), mean size {s25:.2} -> {s250:.2}", c250 / c25),
    )
}

fn boids_fa_spikes() -> Outcome {
    let runs = completed(&experiment("boids-fa", 0, 20));
    let (mut activations, mut spikes) = (0, 0);
    for s in &runs {
        let (ca, cn) = (s.column("event_active").unwrap(), s.column("n_clusters").unwrap());
        for k in 0..s.rows.len() {
            let on = s.rows[k][ca] == 1.0 && (k == 0 || s.rows[k - 1][ca] == 0.0);
            if !on || k + 5 >= s.rows.len() {
                continue;
            }
            activations += 1;
            let base = s.rows[k][cn];
            let peak = s.rows[k + 1..=k + 5].iter().map(|r| r[cn]).fold(0.0, f64::max);
            if peak >= 1.25 * base {
                spikes += 1;
            }
        }
    }
    let share = spikes as f64 / activations.max(1) as f64;
    outcome(
        activations > 0 && share >= 0.8,
        format!("{spikes}/{activations} activations followed by a >=25% rise within 5 steps ({:.0}%)", 100.0 * share),
    )
}

// ---- 13, 14, 15 ----

fn mito_runs() -> &'static HashMap<usize, Vec<Series>> {
    static RUNS: std::sync::OnceLock<HashMap<usize, Vec<Series>>> = std::sync::OnceLock::new();
    RUNS.get_or_init(|| {
        MitoParams::SCENARIOS
            .iter()
            .enumerate()
            .map(|(k, &(fission_p, fusion_p))| {
                let mut exp = experiment("mito", 0, 20);
                exp.spec = ModelSpec::Mito(MitoParams::scenario(fission_p, fusion_p));
                (k, completed(&exp))
            })
            .collect()
    })
}

fn mito_mass() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for runs in mito_runs().values() {
        for s in runs {
            let c = s.column("total_mass").unwrap();
            for row in &s.rows {
                worst = worst.max((row[c] - 300.0).abs() / 300.0);
                checked += 1;
            }
        }
    }
    outcome(worst <= 1e-9 && checked == 3 * 20 * 13, format!("{checked} cycle ends checked, worst relative error {worst:.2e}"))
}

fn variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64
}

fn mito_homeostasis() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (k, &(fp, fu)) in MitoParams::SCENARIOS.iter().enumerate() {
        let runs = &mito_runs()[&k];
        let exp = experiment("mito", 0, 20);
        let summary = ebdevs_harness::aggregate::aggregate(runs, exp.horizon, exp.dt).unwrap();
        let mut ratios = Vec::new();
        for col in ["frac_small", "frac_medium", "frac_large"] {
            // rows are cycle ends 0, 1, ..., 12
            let mean = summary.mean_of(col).unwrap();
            let (early, late) = (variance(&mean[1..=4]), variance(&mean[9..=12]));
            pass &= late < 0.25 * early;
            ratios.push(format!("{:.3}", late / early));
        }
        details.push(format!("{fp}/{fu}: late/early variance {}", ratios.join(" ")));
    }
    outcome(pass, details.join("; "))
}

fn fission_oracle() -> Outcome {
    let examples = [(1.0, 0.0, (0.5, 0.5)), (1.0, 1.0, (0.5, 0.5)), (2.0, 0.0, (0.5, 1.5)), (2.0, 1.0, (1.0, 1.0))];
    let mut pass = examples.iter().all(|&(m, x, want)| fission_split(m, x, 0.5).unwrap() == want);
    let mut rng = RngStream::new(15, 0);
    let mut inexact = 0;
    for _ in 0..10_000 {
        let mass = rng.random_range(1.0..=3.0);
        let x_f = rng.random_range(0.0..=1.0);
        let (m1, m2) = fission_split(mass, x_f, 0.5).unwrap();
        if m1 + m2 != mass || m1 < 0.5 || m2 < 0.5 {
            inexact += 1;
        }
    }
    pass &= inexact == 0;
    outcome(pass, format!("examples reproduced: {}, inexact sums: {inexact}/10000", examples.len()))
}

fn main() {
    // cargo passes test-harness flags such as --list; only a plain run executes
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 15] = [
        ("kernel determinism", determinism),
        ("classic compatibility", classic_compatibility),
        ("closure under coupling", closure_under_coupling),
        ("bisimulation with lowered model", bisimulation),
        ("legitimacy guard", legitimacy),
        ("exponential race", exponential_race),
        ("SIR conservation and monotonicity", sir_conservation),
        ("SIR epidemic shape", sir_shape),
        ("vaccination effect", vaccination_effect),
        ("boids neighbor/cluster oracle", boids_oracle),
        ("boids vanilla trend", boids_vanilla_trend),
        ("boids FA non-convergence", boids_fa_spikes),
        ("mito mass conservation", mito_mass),
        ("mito homeostasis", mito_homeostasis),
        ("fission_split oracle", fission_oracle),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())))));
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name} [{:.1}s]: {}", k + 1, start.elapsed().as_secs_f64(), result.detail);
        if !result.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 15 criteria passed");
    } else {
        println!("acceptance: {} failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
