use ebdevs::transform::{flatten, lower, trace_equivalent, Projection};
use ebdevs::{EventKind, SimTime, Simulation};
use ebdevs_models::sir::{build, Compartment, SirGlobal, SirParams};

fn t(v: f64) -> SimTime {
    SimTime::from_f64(v)
}

fn small(vaccination: bool) -> SirParams {
    SirParams { n: 10, vaccination, ..SirParams::default() }
}

#[test]
fn gallery_model_validates() {
    let m = build(&SirParams::default(), 1, 0).unwrap();
    assert!(m.validate().is_valid());
    assert_eq!(m.len(), 500);
}

#[test]
fn counts_conserved_and_monotone_at_every_cycle() {
    for vaccination in [false, true] {
        let params = SirParams { vaccination, ..SirParams::default() };
        let mut sim = Simulation::new(build(&params, 3, 0).unwrap()).unwrap();
        sim.initialize(t(0.0)).unwrap();
        let (mut s_prev, _, mut r_prev) = sim.global::<SirGlobal>().unwrap().counts();
        while let Some(_) = sim.step().unwrap() {
            let (s, i, r) = sim.global::<SirGlobal>().unwrap().counts();
            assert_eq!(s + i + r, 500);
            assert!(s <= s_prev && r >= r_prev);
            (s_prev, r_prev) = (s, r);
        }
        // recount from the agents themselves
        let g = sim.global::<SirGlobal>().unwrap();
        let leaves = sim.observe();
        let count = |l: &str| leaves.iter().filter(|(p, s)| !p.contains('#') && s == l).count();
        assert_eq!(g.counts(), (count("S") + count("Sv"), count("I"), count("R")));
        assert_eq!(g.vaccinated(), count("Sv"));
        assert_eq!(count("I"), 0, "run ends when no agent is infected");
    }
}

#[test]
fn no_illegal_transitions_in_trace() {
    let mut sim = Simulation::new(build(&small(true), 9, 0).unwrap()).unwrap().with_memory_trace();
    sim.initialize(t(0.0)).unwrap();
    sim.run_until(SimTime::INFINITY).unwrap();
    let mut last = std::collections::HashMap::new();
    for r in sim.take_trace() {
        if matches!(r.kind, EventKind::Output | EventKind::Global) {
            continue;
        }
        if let Some(prev) = last.insert(r.model_path.clone(), r.state.clone()) {
            let ok = prev == r.state
                || (prev == "S" && (r.state == "I" || r.state == "Sv"))
                || (prev == "I" && r.state == "R");
            assert!(ok, "{}: {prev} -> {}", r.model_path, r.state);
        }
    }
}

fn observations<M: ebdevs::Payload + Sync>(sim: Simulation<M>) -> Vec<ebdevs::Observation> {
    let mut sim = sim.with_observations();
    sim.initialize(t(0.0)).unwrap();
    sim.run_until(SimTime::INFINITY).unwrap();
    sim.take_observations()
}

#[test]
fn flattened_and_lowered_runs_match_hierarchical() {
    for vaccination in [false, true] {
        let p = small(vaccination);
        for seed in 1..=5 {
            let hier = observations(Simulation::new(build(&p, seed, 0).unwrap()).unwrap());
            let m = build(&p, seed, 0).unwrap();
            let flat = observations(Simulation::from_atomic(m.name().to_string(), flatten(m)));
            let eq = trace_equivalent(&hier, &flat, Projection::Identity);
            assert!(eq.equivalent, "flatten seed {seed}: {:?}", eq.divergence);
            let low = observations(Simulation::new(lower(build(&p, seed, 0).unwrap()).unwrap()).unwrap());
            let eq = trace_equivalent(&hier, &low, Projection::BroadcastFiltered);
            assert!(eq.equivalent, "lower seed {seed}: {:?}", eq.divergence);
        }
    }
}

#[test]
fn vaccination_never_increases_infections_on_the_same_seed_mostly() {
    let mut fewer_or_equal = 0;
    for seed in 0..10 {
        let run = |vaccination| {
            let p = SirParams { vaccination, ..SirParams::default() };
            let mut sim = Simulation::new(build(&p, seed, 0).unwrap()).unwrap();
            sim.initialize(t(0.0)).unwrap();
            sim.run_until(SimTime::INFINITY).unwrap();
            sim.global::<SirGlobal>().unwrap().cumulative_infections()
        };
        if run(true) <= run(false) {
            fewer_or_equal += 1;
        }
    }
    assert!(fewer_or_equal >= 9, "{fewer_or_equal}/10");
}

#[test]
fn same_seed_same_network_and_initial_infected() {
    let a = ebdevs_models::sir::SirSetup::sample(&SirParams::default(), 4, 2).unwrap();
    let b = ebdevs_models::sir::SirSetup::sample(&SirParams::default(), 4, 2).unwrap();
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.initial, b.initial);
    assert_eq!(a.initial.iter().filter(|&&c| c == Compartment::Infected).count(), 50);
    let mean = a.graph.mean_degree();
    assert!((mean - 10.0).abs() < 1.0, "mean degree {mean}");
}
