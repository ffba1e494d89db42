use std::io::BufReader;

use aero_orch::allocate::{
    check_constraints, oracle_solve, request_latency, total_energy, Constraint, OracleLimits, DEFAULT_ALPHA,
};
use aero_orch::environment::{ArrivalConfig, World};
use aero_orch::model::GeneratorConfig;
use aero_orch::orchestrator::*;
use aero_orch::Error;

mod common;
use common::hand_instance;

fn toy_world(seed: u64) -> World {
    World::realize(&GeneratorConfig::toy().generate(seed).unwrap(), None).unwrap()
}

/// The 4×4 desk network with a Poisson request stream, 40 frames.
fn desk_world(seed: u64) -> World {
    let mut g = GeneratorConfig::default().with_node_count(6);
    g.total_frames = 40;
    let inst = g.generate(seed).unwrap();
    World::realize(&inst, Some(&ArrivalConfig::default())).unwrap()
}

fn run(world: &World, config: &OrchestratorConfig, policy: PolicyKind) -> Episode {
    let inst = &world.instance;
    let agents = Agents::new(inst, &config.agents, inst.seeds).unwrap();
    run_episode(world, config, policy, agents, None).unwrap().0
}

#[test]
fn combined_reward_arithmetic() {
    let config = OrchestratorConfig::default();
    assert_eq!((config.chi, config.kappa), (0.5, 0.8));
    assert!((config.combined_reward(2.0, 1.0, 1.0) - 3.3).abs() < 1e-12);
}

#[test]
fn phase_boundary_at_a_quarter() {
    let config = OrchestratorConfig::default();
    assert_eq!(config.phase_boundary(200), 50);
    assert_eq!(config.phase(49, 200), Phase::LowLevel);
    assert_eq!(config.phase(50, 200), Phase::Hierarchical);
    let world = toy_world(0);
    let episode = run(&world, &config, PolicyKind::Random);
    for f in &episode.trace {
        assert_eq!(f.phase, config.phase(f.frame, world.frames()));
        let expected = match f.phase {
            Phase::LowLevel => f.rewards.tp,
            Phase::Hierarchical => f.rewards.hl,
        };
        assert_eq!(f.training_reward, expected);
        assert!(f.rewards.tp.is_finite() && f.rewards.mac.is_finite());
        assert!(f.rewards.pl.is_finite() && f.rewards.hl.is_finite());
    }
}

#[test]
fn structural_constraints_hold_for_every_policy() {
    let structural = [Constraint::C3, Constraint::C4, Constraint::C10, Constraint::C11];
    let config = OrchestratorConfig {
        strict: true,
        ..OrchestratorConfig::toy()
    };
    for seed in 0..4 {
        for world in [toy_world(seed), desk_world(seed)] {
            for policy in [PolicyKind::Perfect, PolicyKind::Random] {
                let episode = run(&world, &config, policy);
                for f in &episode.trace {
                    assert!(f.violations.iter().all(|v| !structural.contains(&v.constraint)));
                }
                assert!(episode.violations.is_empty(), "seed {seed} {policy}: {:?}", episode.violations);
            }
        }
    }
}

#[test]
fn accepted_requests_meet_quota_and_latency() {
    let config = OrchestratorConfig::toy();
    for seed in 0..4 {
        let world = desk_world(seed);
        for policy in [PolicyKind::Perfect, PolicyKind::Random] {
            let episode = run(&world, &config, policy);
            let violations = check_constraints(&episode.allocation, &world).unwrap();
            assert!(violations
                .iter()
                .all(|v| v.constraint != Constraint::C6 && v.constraint != Constraint::C12));
            for f in &episode.trace {
                for &(r, latency) in &f.metrics.latencies {
                    assert!(latency <= world.request(r).latency_req * (1.0 + 1e-9));
                }
            }
        }
    }
}

#[test]
fn oracle_replay_reproduces_the_certificate() {
    let config = OrchestratorConfig::default();
    let mut replayed = 0;
    for seed in 0..15 {
        let world = World::realize(&GeneratorConfig::micro().generate(seed).unwrap(), None).unwrap();
        let sol = oracle_solve(&world, DEFAULT_ALPHA, &OracleLimits::default()).unwrap();
        let inst = &world.instance;
        let agents = Agents::new(inst, &config.agents, inst.seeds).unwrap();
        let (episode, _) =
            run_episode(&world, &config, PolicyKind::OracleReplay, agents, Some(sol.allocation.clone())).unwrap();
        assert_eq!(episode.allocation, sol.allocation);
        assert!(episode.violations.is_empty());
        assert_eq!(episode.accepted(), sol.report.accepted_count);
        let e = &sol.report.energy;
        let got: (f64, f64, f64, f64) = episode.trace.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, f| {
            let m = &f.metrics.energy;
            (acc.0 + m.placement, acc.1 + m.movement, acc.2 + m.link, acc.3 + m.channel)
        });
        for (a, b) in [(got.0, e.placement), (got.1, e.movement), (got.2, e.link), (got.3, e.channel)] {
            assert!((a - b).abs() <= 1e-9 * b.max(1.0), "seed {seed}: {a} vs {b}");
        }
        assert!((episode.objective(DEFAULT_ALPHA) - sol.report.objective_value).abs() < 1e-9);
        replayed += usize::from(sol.report.accepted_count > 0);
    }
    assert!(replayed > 0);
}

#[test]
fn oracle_replay_needs_an_allocation() {
    let world = toy_world(0);
    let config = OrchestratorConfig::default();
    let agents = Agents::new(&world.instance, &config.agents, world.instance.seeds).unwrap();
    assert!(run_episode(&world, &config, PolicyKind::OracleReplay, agents, None).is_err());
}

#[test]
fn empty_horizon_gives_empty_trace() {
    let mut inst = GeneratorConfig::toy().generate(0).unwrap();
    inst.time.total_frames = 0;
    inst.requests.clear();
    let world = World::realize(&inst, None).unwrap();
    let episode = run(&world, &OrchestratorConfig::default(), PolicyKind::Perfect);
    assert!(episode.trace.is_empty());
    assert!(episode.allocation.is_empty());
}

#[test]
fn unservable_requests_are_rejected_up_front() {
    let mut inst = hand_instance();
    inst.requests[0].required_slots = inst.time.slots_per_frame + 1;
    let err = World::realize(&inst, None).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn same_seeds_give_identical_traces() {
    let config = OrchestratorConfig::toy();
    for policy in [PolicyKind::Perfect, PolicyKind::Random] {
        let a = run(&desk_world(3), &config, policy);
        let b = run(&desk_world(3), &config, policy);
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn zero_weights_reduce_training_reward_to_trajectory_reward() {
    let config = OrchestratorConfig {
        chi: 0.0,
        kappa: 0.0,
        ..OrchestratorConfig::toy()
    };
    let episode = run(&toy_world(1), &config, PolicyKind::Perfect);
    for f in &episode.trace {
        assert_eq!(f.rewards.hl, f.rewards.tp);
        assert_eq!(f.training_reward, f.rewards.tp);
    }
}

#[test]
fn frame_energy_adds_up_to_total_energy() {
    let config = OrchestratorConfig::toy();
    for seed in 0..3 {
        let world = desk_world(seed);
        for policy in [PolicyKind::Perfect, PolicyKind::Random] {
            let episode = run(&world, &config, policy);
            let total = total_energy(&episode.allocation, &world).unwrap();
            let sum = |f: fn(&FrameOutcome) -> f64| episode.trace.iter().map(f).sum::<f64>();
            let pairs = [
                (sum(|f| f.metrics.energy.placement), total.placement),
                (sum(|f| f.metrics.energy.movement), total.movement),
                (sum(|f| f.metrics.energy.link), total.link),
                (sum(|f| f.metrics.energy.channel), total.channel),
            ];
            for (a, b) in pairs {
                assert!((a - b).abs() <= 1e-9 * b.max(1.0), "seed {seed} {policy}: {a} vs {b}");
            }
            assert!((episode.energy() - total.total()).abs() <= 1e-9 * total.total().max(1.0));
        }
    }
}

#[test]
fn reported_latencies_match_the_allocation() {
    let config = OrchestratorConfig::toy();
    let mut seen = 0;
    for seed in 0..6 {
        let world = desk_world(seed);
        for policy in [PolicyKind::Perfect, PolicyKind::Random] {
            let episode = run(&world, &config, policy);
            for f in &episode.trace {
                for &(r, latency) in &f.metrics.latencies {
                    let direct = request_latency(&episode.allocation, &world, r);
                    assert!((latency - direct).abs() <= 1e-9 * direct.max(1.0));
                    seen += 1;
                }
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn checkpoint_restore_continues_identically() {
    let world = toy_world(2);
    let config = OrchestratorConfig::toy();
    let inst = &world.instance;
    let agents = Agents::new(inst, &config.agents, inst.seeds).unwrap();
    let mut straight = Orchestrator::new(&world, config.clone(), PolicyKind::Perfect, agents.clone()).unwrap();
    for _ in 0..60 {
        straight.run_frame().unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checkpoint.json");
    straight.checkpoint().save(&path).unwrap();

    let mut resumed = Orchestrator::new(&world, config, PolicyKind::Perfect, agents).unwrap();
    resumed.restore(Checkpoint::load(&path).unwrap()).unwrap();
    assert_eq!(resumed.state.frame, 60);
    let a = straight.run().unwrap();
    let b = resumed.run().unwrap();
    assert_eq!(a, b);
}

#[test]
fn checkpoint_for_another_shape_is_refused() {
    let config = OrchestratorConfig::toy();
    let small = toy_world(0);
    let big = desk_world(0);
    let orch = Orchestrator::new(&small, config.clone(), PolicyKind::Perfect,
        Agents::new(&small.instance, &config.agents, small.instance.seeds).unwrap()).unwrap();
    let mut other = Orchestrator::new(&big, config.clone(), PolicyKind::Perfect,
        Agents::new(&big.instance, &config.agents, big.instance.seeds).unwrap()).unwrap();
    assert!(other.restore(orch.checkpoint()).is_err());
}

#[test]
fn agents_round_trip_through_a_file() {
    let world = toy_world(4);
    let config = OrchestratorConfig::toy();
    let inst = &world.instance;
    let agents = Agents::new(inst, &config.agents, inst.seeds).unwrap();
    let (_, trained) = run_episode(&world, &config, PolicyKind::Perfect, agents, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("agents.json");
    trained.save(&path).unwrap();
    assert_eq!(Agents::load(&path).unwrap(), trained);
}

#[test]
fn trace_round_trip() {
    let world = toy_world(5);
    let episode = run(&world, &OrchestratorConfig::toy(), PolicyKind::Random);
    let mut buf = Vec::new();
    write_trace(&"header", &episode.trace, &mut buf).unwrap();
    assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), episode.trace.len() + 1);
    let (header, frames): (String, Vec<FrameOutcome>) = read_trace(BufReader::new(&buf[..])).unwrap();
    assert_eq!(header, "header");
    assert_eq!(frames, episode.trace);
}

#[test]
fn toy_training_reward_improves() {
    let config = OrchestratorConfig::toy();
    for seed in 0..3 {
        let world = toy_world(seed);
        let episode = run(&world, &config, PolicyKind::Perfect);
        let r: Vec<f64> = episode.trace.iter().map(|f| f.training_reward).collect();
        let k = r.len() / 10;
        let lead = r[..k].iter().sum::<f64>() / k as f64;
        let trail = r[r.len() - k..].iter().sum::<f64>() / k as f64;
        assert!(trail > lead, "seed {seed}: leading {lead}, trailing {trail}");
    }
}
