use aero_orch::allocate::*;
use aero_orch::environment::World;
use aero_orch::model::GeneratorConfig;
use aero_orch::Error;

mod common;
use common::hand_instance;

fn micro_world(seed: u64) -> World {
    World::realize(&GeneratorConfig::micro().generate(seed).unwrap(), None).unwrap()
}

#[test]
fn zero_requests_give_empty_allocation() {
    let mut inst = GeneratorConfig::micro().generate(3).unwrap();
    inst.requests.clear();
    let world = World::realize(&inst, None).unwrap();
    let sol = oracle_solve(&world, DEFAULT_ALPHA, &OracleLimits::default()).unwrap();
    assert_eq!(sol.report.objective_value, 0.0);
    assert!(sol.allocation.x_select.is_empty());
    assert!(sol.allocation.y_place.is_empty());
    assert!(sol.allocation.z_channel.is_empty());
    assert!(sol.allocation.r_path.is_empty());
    assert!(sol.report.feasible());
}

#[test]
fn hand_enumerated_single_request() {
    let mut world = World::realize(&hand_instance(), None).unwrap();
    world.fill_quality(true);
    // The UAV must stay over the UE to serve as its attachment. The
    // function then runs either on the UAV (30) or on the RSU behind one
    // link, visited on a round trip (12 + 5). The slot costs 3 either way.
    let expected_energy = 12.0 + 5.0 + 3.0;
    let sol = oracle_solve(&world, DEFAULT_ALPHA, &OracleLimits::default()).unwrap();
    assert_eq!(sol.report.accepted_count, 1);
    assert!((sol.report.total_energy - expected_energy).abs() < 1e-12);
    assert!((sol.report.objective_value - (1.0 - DEFAULT_ALPHA * expected_energy)).abs() < 1e-12);
    assert!(sol.allocation.y_place.contains(&(0, 0, 0)));
}

#[test]
fn hand_instance_without_quality_rejects() {
    let mut world = World::realize(&hand_instance(), None).unwrap();
    world.fill_quality(false);
    let sol = oracle_solve(&world, DEFAULT_ALPHA, &OracleLimits::default()).unwrap();
    assert_eq!(sol.report.accepted_count, 0);
    assert_eq!(sol.report.objective_value, 0.0);
}

#[test]
fn oracle_output_passes_checker() {
    let mut accepted = 0;
    for seed in 0..20 {
        let world = micro_world(seed);
        let sol = oracle_solve(&world, DEFAULT_ALPHA, &OracleLimits::default()).unwrap();
        let violations = check_constraints(&sol.allocation, &world).unwrap();
        assert!(violations.is_empty(), "seed {seed}: {violations:?}");
        accepted += sol.report.accepted_count;
        let recomputed = objective(&sol.allocation, &world, DEFAULT_ALPHA).unwrap();
        assert_eq!(recomputed, sol.report);
        for r in 0..world.requests().len() {
            let in_x = accepted_requests(&sol.allocation, &world).contains(&r);
            assert_eq!(acceptance(&sol.allocation, &world, r), in_x);
        }
    }
    assert!(accepted > 0, "micro instances never accept anything");
}

#[test]
fn pruned_and_unpruned_search_agree() {
    let mut compared = 0;
    let mut seed = 0;
    while compared < 20 {
        let world = micro_world(seed);
        seed += 1;
        if brute_force_size(&world) > DEFAULT_BRUTE_BUDGET {
            continue;
        }
        let limits = OracleLimits::default();
        let fast = oracle_solve(&world, DEFAULT_ALPHA, &limits).unwrap();
        let slow = brute_force_solve(&world, DEFAULT_ALPHA, &limits, DEFAULT_BRUTE_BUDGET).unwrap();
        let (a, b) = (fast.report.objective_value, slow.report.objective_value);
        assert!((a - b).abs() <= 1e-9, "seed {}: oracle {a} brute {b}", seed - 1);
        compared += 1;
    }
}

#[test]
fn oversized_instance_is_refused() {
    let inst = GeneratorConfig::default().generate(1).unwrap();
    let world = World::realize(&inst, None).unwrap();
    let err = oracle_solve(&world, DEFAULT_ALPHA, &OracleLimits::default()).unwrap_err();
    assert!(matches!(err, Error::Size(_)));
}

#[test]
fn energy_scale_leaves_argmax_unchanged() {
    for seed in 0..10 {
        let base = GeneratorConfig::micro().generate(seed).unwrap();
        let mut scaled = base.clone();
        for n in &mut scaled.nodes {
            n.deploy_energy *= 2.0;
            if let Some(p) = n.uav_params.as_mut() {
                p.induced_power *= 2.0;
                p.drag_coeff *= 2.0;
            }
        }
        for l in &mut scaled.links {
            l.transmit_energy *= 2.0;
        }
        for c in &mut scaled.channels {
            c.use_energy *= 2.0;
        }
        let w1 = World::realize(&base, None).unwrap();
        let w2 = World::realize(&scaled, None).unwrap();
        let limits = OracleLimits::default();
        let a = oracle_solve(&w1, DEFAULT_ALPHA, &limits).unwrap();
        let b = oracle_solve(&w2, DEFAULT_ALPHA / 2.0, &limits).unwrap();
        assert_eq!(a.allocation, b.allocation, "seed {seed}");
    }
}

#[test]
fn certificate_round_trips() {
    let world = micro_world(2);
    let cert = Certificate::from(oracle_solve(&world, DEFAULT_ALPHA, &OracleLimits::default()).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.toml");
    cert.save(&path).unwrap();
    assert_eq!(Certificate::load(&path).unwrap(), cert);
}
