use std::collections::BTreeMap;

use aero_orch::agents::*;
use aero_orch::allocate::{total_energy, DEFAULT_ALPHA};
use aero_orch::environment::{next_area_distribution, relocation_energy, UeState, World};
use aero_orch::model::{AreaGrid, GeneratorConfig, Heading, Instance, LinkSpec, NodeKind, NodeSpec};
use aero_orch::orchestrator::{run_episode, Agents, FailReason, OrchestratorConfig, PolicyKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::hand_instance;

fn frame(demand: Vec<f64>, uav_areas: Vec<usize>) -> TpFrame {
    TpFrame { demand, uav_areas }
}

/// Reads the encoding back position by position: which frame, then whether
/// the entry is a demand value or a UAV-area indicator.
fn decode_check(encoded: &[f64], frames: &[TpFrame], history: usize, areas: usize, uavs: usize) {
    let block = areas + uavs * areas;
    assert_eq!(encoded.len(), history * block);
    let kept = &frames[frames.len().saturating_sub(history)..];
    let pad = history - kept.len();
    for (i, &v) in encoded.iter().enumerate() {
        let (slot, k) = (i / block, i % block);
        let expected = if slot < pad {
            0.0
        } else {
            let f = &kept[slot - pad];
            if k < areas {
                f.demand[k]
            } else {
                let (uav, area) = ((k - areas) / areas, (k - areas) % areas);
                if f.uav_areas[uav] == area {
                    1.0
                } else {
                    0.0
                }
            }
        };
        assert_eq!(v, expected, "position {i}");
    }
}

#[test]
fn tp_encode_without_requests_has_zero_demand() {
    let frames = vec![frame(vec![0.0; 4], vec![2]), frame(vec![0.0; 4], vec![3])];
    let s = tp_encode(&frames, 2, 4, 1).unwrap();
    assert_eq!(s.len(), tp_state_len(4, 1, 2));
    for slot in 0..2 {
        assert!(s[slot * 8..slot * 8 + 4].iter().all(|&v| v == 0.0));
    }
    assert_eq!(s[4 + 2], 1.0);
    assert_eq!(s[8 + 4 + 3], 1.0);
}

#[test]
fn tp_encode_single_request_term() {
    let s = tp_encode(&[frame(vec![0.0, 0.0, 0.0, 10.0], vec![0])], 1, 4, 1).unwrap();
    assert_eq!(&s[..4], &[0.0, 0.0, 0.0, 10.0]);

    // One request with a single function of capacity 10 from a UE in area 0.
    let world = World::realize(&hand_instance(), None).unwrap();
    assert_eq!(area_demand(&world, 0), vec![10.0, 0.0]);
}

#[test]
fn tp_encode_pads_the_episode_start() {
    let frames = vec![frame(vec![1.0, 2.0], vec![1])];
    let s = tp_encode(&frames, 3, 2, 1).unwrap();
    assert!(s[..8].iter().all(|&v| v == 0.0));
    assert_eq!(&s[8..], &[1.0, 2.0, 0.0, 1.0]);
}

#[test]
fn tp_encode_rejects_bad_shapes() {
    assert!(tp_encode(&[frame(vec![0.0; 3], vec![0])], 1, 4, 1).is_err());
    assert!(tp_encode(&[frame(vec![0.0; 4], vec![4])], 1, 4, 1).is_err());
}

#[test]
fn tp_encode_matches_independent_decoding() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let areas = rng.random_range(1..7);
        let uavs = rng.random_range(0..4);
        let history = rng.random_range(1..5);
        let n = rng.random_range(0..7);
        let frames: Vec<TpFrame> = (0..n)
            .map(|_| {
                frame(
                    (0..areas).map(|_| rng.random_range(0.0..50.0)).collect(),
                    (0..uavs).map(|_| rng.random_range(0..areas)).collect(),
                )
            })
            .collect();
        let s = tp_encode(&frames, history, areas, uavs).unwrap();
        decode_check(&s, &frames, history, areas, uavs);
    }
}

#[test]
fn area_demand_matches_direct_sum() {
    for seed in 0..10 {
        let world = World::realize(&GeneratorConfig::toy().generate(seed).unwrap(), None).unwrap();
        let areas = world.instance.grid.len();
        for t in 0..world.frames() {
            let mut expected = vec![0.0; areas];
            for r in world.requests() {
                if t >= r.active_window.0 && t < r.active_window.1 {
                    let area = world.ue_trace[t].iter().find(|u| u.ue == r.ue).unwrap().area;
                    for c in &r.capacity_req {
                        expected[area] += c;
                    }
                }
            }
            let got = area_demand(&world, t);
            for a in 0..areas {
                assert!((got[a] - expected[a]).abs() < 1e-9, "seed {seed} frame {t} area {a}");
                assert!(got[a] >= 0.0);
            }
        }
    }
}

#[test]
fn tp_reward_arithmetic() {
    assert_eq!(tp_reward(3, 0.0, DEFAULT_ALPHA), 3.0);
    assert!((tp_reward(0, 100.0, 0.001) + 0.1).abs() < 1e-12);
}

#[test]
fn tp_reward_movement_is_relocation_energy() {
    let config = OrchestratorConfig::toy();
    for seed in 0..5 {
        let world = World::realize(&GeneratorConfig::toy().generate(seed).unwrap(), None).unwrap();
        let inst = &world.instance;
        let agents = Agents::new(inst, &config.agents, inst.seeds).unwrap();
        let (episode, _) = run_episode(&world, &config, PolicyKind::Random, agents, None).unwrap();
        let mut prev: BTreeMap<usize, usize> = inst
            .nodes
            .iter()
            .filter(|n| n.is_uav())
            .map(|n| (n.id, n.initial_area()))
            .collect();
        for f in &episode.trace {
            let t = f.frame;
            let mut moved = 0.0;
            for node in inst.nodes.iter().filter(|n| n.is_uav()) {
                let to = f.allocation.area_of(t, node.id).unwrap();
                if to != prev[&node.id] {
                    moved += relocation_energy(node, &inst.grid, prev[&node.id], to).unwrap();
                }
                prev.insert(node.id, to);
            }
            assert!((f.metrics.energy.movement - moved).abs() <= 1e-9 * moved.max(1.0));
            let connected = world
                .active_requests(t)
                .iter()
                .filter(|&&r| f.allocation.poa_of(t, world.request(r).ue).is_some())
                .count();
            let expected = connected as f64 - config.alpha * moved;
            assert!((f.rewards.tp - expected).abs() < 1e-9, "seed {seed} frame {t}");
        }
    }
}

fn areas(pairs: &[(usize, usize)]) -> BTreeMap<usize, usize> {
    pairs.iter().copied().collect()
}

#[test]
fn select_poa_single_rsu() {
    let poa = select_poa(&[1], &areas(&[(0, 1)]), &[50.0], &[1.0], &BTreeMap::new());
    assert_eq!(poa, vec![Some(0)]);
}

#[test]
fn select_poa_uncovered_ue_is_unbound() {
    let poa = select_poa(&[0, 1], &areas(&[(0, 1)]), &[50.0], &[1.0, 1.0], &BTreeMap::new());
    assert_eq!(poa, vec![None, Some(0)]);
    assert_eq!(tp_reward(poa.iter().flatten().count(), 0.0, DEFAULT_ALPHA), 1.0);
}

#[test]
fn select_poa_prefers_residual_capacity() {
    // RSU 0 with residual 5 and UAV 1 with residual 20 in the same area.
    let poa = select_poa(&[2], &areas(&[(0, 2), (1, 2)]), &[5.0, 20.0], &[1.0], &BTreeMap::new());
    assert_eq!(poa, vec![Some(1)]);
}

#[test]
fn select_poa_ties_and_consumption() {
    let nodes = areas(&[(3, 0), (5, 0)]);
    let residual = [0.0, 0.0, 0.0, 10.0, 0.0, 10.0];
    // Equal residuals go to the lower id; the first UE's demand then tips
    // the second UE to the other node.
    let poa = select_poa(&[0, 0], &nodes, &residual, &[4.0, 4.0], &BTreeMap::new());
    assert_eq!(poa, vec![Some(3), Some(5)]);
    let pinned = BTreeMap::from([(0, 5)]);
    let poa = select_poa(&[0], &nodes, &residual, &[4.0], &pinned);
    assert_eq!(poa, vec![Some(5)]);
    // A pin on a node elsewhere is ignored.
    let pinned = BTreeMap::from([(0, 9)]);
    let poa = select_poa(&[0], &nodes, &residual, &[4.0], &pinned);
    assert_eq!(poa, vec![Some(3)]);
}

#[test]
fn pl_mask_zero_demand_masks_row() {
    let mask = pl_mask(&[0.0, 5.0], &[10.0, 10.0, 10.0]);
    assert_eq!(&mask[..3], &[false, false, false]);
    assert_eq!(&mask[3..], &[true, true, true]);
}

#[test]
fn pl_mask_exhausted_node_masks_column() {
    let mask = pl_mask(&[1.0, 5.0, 0.5], &[10.0, 0.0]);
    for f in 0..3 {
        assert!(!mask[f * 2 + 1]);
        assert!(mask[f * 2]);
    }
}

#[test]
fn pl_mask_agrees_with_direct_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let nf = rng.random_range(1..6);
        let nn = rng.random_range(1..6);
        let demand: Vec<f64> = (0..nf)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..40.0) })
            .collect();
        let residual: Vec<f64> = (0..nn).map(|_| rng.random_range(0.0..40.0)).collect();
        let mask = pl_mask(&demand, &residual);
        for f in 0..nf {
            for n in 0..nn {
                let direct = demand[f] > 0.0 && demand[f] <= residual[n];
                assert_eq!(mask[f * nn + n], direct, "f {f} n {n}: {} vs {}", demand[f], residual[n]);
            }
        }
    }
}

fn node(id: usize, kind: NodeKind, capacity: f64, energy: f64) -> NodeSpec {
    NodeSpec {
        id,
        kind,
        processing_capacity: capacity,
        deploy_energy: energy,
        fixed_area: Some(0),
        start_area: None,
        uav_params: None,
    }
}

#[test]
fn placements_respect_node_capacity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let nn = rng.random_range(1..5);
        let nodes: Vec<NodeSpec> = (0..nn)
            .map(|i| node(i, NodeKind::Core, rng.random_range(5.0..60.0), 10.0))
            .collect();
        let demand: Vec<f64> = (0..rng.random_range(1..5))
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(1.0..40.0) })
            .collect();
        let mut pick = ChaCha8Rng::seed_from_u64(rng.random());
        let placement = place_functions(&demand, &nodes, |_, mask| {
            let valid: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
            Ok(valid[pick.random_range(0..valid.len())])
        })
        .unwrap();
        let mut load = vec![0.0; nn];
        for (&f, &n) in &placement.hosts {
            assert!(demand[f] > 0.0);
            load[n] += demand[f];
        }
        for n in 0..nn {
            assert!(load[n] <= nodes[n].processing_capacity * (1.0 + 1e-9), "node {n} overloaded");
        }
        for (f, &d) in demand.iter().enumerate() {
            let placed = placement.hosts.contains_key(&f);
            let dropped = placement.infeasible.contains(&f);
            assert_eq!(d > 0.0, placed || dropped);
            assert!(!(placed && dropped));
        }
    }
}

#[test]
fn masked_placement_action_is_refused() {
    let nodes = vec![node(0, NodeKind::Core, 10.0, 1.0), node(1, NodeKind::Core, 1.0, 1.0)];
    let err = place_functions(&[5.0], &nodes, |_, _| Ok(1));
    assert!(err.is_err());
}

/// The hand instance plus a core node in area 1 reachable from both the
/// UAV (link 1) and the RSU (link 2); the direct UAV-RSU link costs 10,
/// the detour through the core 3.5 + 3.5.
fn detour_world() -> World {
    let mut inst: Instance = hand_instance();
    inst.nodes.push(NodeSpec {
        fixed_area: Some(1),
        ..node(2, NodeKind::Core, 50.0, 5.0)
    });
    inst.links[0].transmit_energy = 10.0;
    for (id, endpoints) in [(1, (1, 2)), (2, (2, 0))] {
        inst.links.push(LinkSpec {
            id,
            endpoints,
            bandwidth_capacity: 20.0,
            transmit_energy: 3.5,
            base_latency: 10.0,
        });
    }
    World::realize(&inst, None).unwrap()
}

fn route_one(world: &World, host: usize, load: &mut [f64]) -> RouteDiagnostic {
    let req = RouteRequest {
        request: 0,
        head: 1,
        tail: 0,
        latency_left: 100.0,
    };
    let hosts = BTreeMap::from([(0, host)]);
    let latency = vec![10.0; world.instance.links.len()];
    pl_route(world, &[req], &hosts, load, &latency).remove(0)
}

#[test]
fn pl_route_single_feasible_path() {
    let world = detour_world();
    let mut load = vec![0.0; 3];
    let d = route_one(&world, 2, &mut load);
    assert_eq!(d.feasible, 1);
    let path = &world.paths.paths[d.choice.unwrap().path];
    assert_eq!(path.node_sequence, vec![1, 2, 0]);
    assert_eq!(load, vec![0.0, 4.0, 4.0]);
}

#[test]
fn pl_route_takes_the_cheaper_path() {
    let world = detour_world();
    let mut load = vec![0.0; 3];
    let d = route_one(&world, 0, &mut load);
    assert_eq!(d.feasible, 2);
    let c = d.choice.unwrap();
    assert_eq!(c.energy, 7.0);
    assert_eq!(world.paths.paths[c.path].node_sequence, vec![1, 2, 0]);

    let candidates = [
        RouteChoice { path: 4, energy: 10.0, latency: 1.0, hops: 1 },
        RouteChoice { path: 9, energy: 7.0, latency: 1.0, hops: 2 },
    ];
    assert_eq!(cheapest(&candidates), 1);
}

#[test]
fn pl_route_without_capacity_fails() {
    let world = detour_world();
    let mut load = vec![18.0, 18.0, 18.0];
    let d = route_one(&world, 0, &mut load);
    assert_eq!(d.feasible, 0);
    assert!(d.choice.is_none());
    assert_eq!(load, vec![18.0; 3]);
}

fn visits_chain(sequence: &[usize], hosts: &[usize]) -> bool {
    // Greedy subsequence match; a node may host consecutive functions.
    let mut i = 0;
    for &h in hosts {
        while i < sequence.len() && sequence[i] != h {
            i += 1;
        }
        if i == sequence.len() {
            return false;
        }
    }
    true
}

#[test]
fn pl_route_matches_exhaustive_scan() {
    let mut compared = 0;
    for seed in 0..30u64 {
        let world = World::realize(&GeneratorConfig::micro().generate(seed).unwrap(), None).unwrap();
        let inst = &world.instance;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nn = inst.nodes.len();
        let radio: Vec<usize> = inst.nodes.iter().filter(|n| n.kind.is_radio()).map(|n| n.id).collect();
        for r in 0..world.requests().len() {
            let req = world.request(r);
            let chain = inst.service_of(req).functions.clone();
            let hosts: BTreeMap<usize, usize> = chain.iter().map(|&f| (f, rng.random_range(0..nn))).collect();
            let head = radio[rng.random_range(0..radio.len())];
            let tail = radio[rng.random_range(0..radio.len())];
            let mut load: Vec<f64> = inst
                .links
                .iter()
                .map(|l| rng.random_range(0.0..l.bandwidth_capacity))
                .collect();
            let latency: Vec<f64> = inst.links.iter().map(|_| rng.random_range(1.0..60.0)).collect();
            let budget = rng.random_range(10.0..200.0);

            let host_seq: Vec<usize> = chain.iter().map(|f| hosts[f]).collect();
            let mut best: Option<f64> = None;
            for p in &world.paths.paths {
                if p.node_sequence[0] != head || *p.node_sequence.last().unwrap() != tail {
                    continue;
                }
                if !visits_chain(&p.node_sequence, &host_seq) {
                    continue;
                }
                let mut links = p.link_sequence.clone();
                links.sort();
                links.dedup();
                if links.iter().any(|&l| load[l] + req.bandwidth_req > inst.links[l].bandwidth_capacity) {
                    continue;
                }
                if links.iter().map(|&l| latency[l]).sum::<f64>() > budget {
                    continue;
                }
                let e: f64 = links.iter().map(|&l| inst.links[l].transmit_energy).sum();
                best = Some(best.map_or(e, |b: f64| b.min(e)));
            }

            let rr = RouteRequest {
                request: r,
                head,
                tail,
                latency_left: budget,
            };
            let d = pl_route(&world, &[rr], &hosts, &mut load, &latency).remove(0);
            match (best, d.choice) {
                (None, None) => {}
                (Some(b), Some(c)) => {
                    assert!((c.energy - b).abs() < 1e-9, "seed {seed} request {r}: {} vs {b}", c.energy);
                    compared += 1;
                }
                (b, c) => panic!("seed {seed} request {r}: scan {b:?}, router {c:?}"),
            }
        }
    }
    assert!(compared >= 10, "only {compared} routable cases");
}

#[test]
fn pl_reward_arithmetic() {
    assert!((pl_reward(2, 50.0, 30.0, 0, 0.001, ROUTING_PENALTY) - 1.92).abs() < 1e-12);
    assert_eq!(pl_reward(0, 0.0, 0.0, 4, 0.001, ROUTING_PENALTY), -4.0);
}

#[test]
fn pl_reward_energy_terms_match_total_energy() {
    let config = OrchestratorConfig::toy();
    for seed in 0..5 {
        let world = World::realize(&GeneratorConfig::toy().generate(seed).unwrap(), None).unwrap();
        let inst = &world.instance;
        for policy in [PolicyKind::Perfect, PolicyKind::Random] {
            let agents = Agents::new(inst, &config.agents, inst.seeds).unwrap();
            let (episode, _) = run_episode(&world, &config, policy, agents, None).unwrap();
            for f in &episode.trace {
                let e = total_energy(&f.allocation, &world).unwrap();
                assert_eq!(e.placement, f.metrics.energy.placement);
                assert!((e.link - f.metrics.energy.link).abs() < 1e-9);
                let selected = f.allocation.r_path.len();
                let failed = f
                    .metrics
                    .failed
                    .iter()
                    .filter(|(_, why)| matches!(why, FailReason::Placement | FailReason::Routing))
                    .count();
                let expected = selected as f64 - config.alpha * (e.placement + e.link) - failed as f64;
                assert!((f.rewards.pl - expected).abs() < 1e-9, "seed {seed} {policy} frame {}", f.frame);
            }
        }
    }
}

fn grid(rows: usize, cols: usize) -> AreaGrid {
    AreaGrid::new(rows, cols, vec![0.5; rows * cols]).unwrap()
}

#[test]
fn predictor_mid_grid_heading_north() {
    let g = grid(3, 3);
    let mid = g.area_at(1, 1);
    let mut p = Predictor::new(g.clone(), 1, DEFAULT_DECAY).unwrap();
    p.observe(&[UeState { ue: 0, area: mid, heading: Heading::N }], &[]).unwrap();
    let report = p.predict(1).unwrap();
    let dist = &report.ue_areas[0];
    let north = g.step(mid, Heading::N).unwrap();
    let west = g.step(mid, Heading::W).unwrap();
    let east = g.step(mid, Heading::E).unwrap();
    assert_eq!(dist[north], 0.5);
    assert_eq!(dist[west], 0.25);
    assert_eq!(dist[east], 0.25);
    assert_eq!(dist.iter().sum::<f64>(), 1.0);
}

#[test]
fn predictor_single_area_grid() {
    let mut p = Predictor::new(grid(1, 1), 2, DEFAULT_DECAY).unwrap();
    p.observe(&[UeState { ue: 0, area: 0, heading: Heading::E }], &[]).unwrap();
    assert_eq!(p.predict(1).unwrap().ue_areas[0], vec![1.0]);
}

#[test]
fn predictor_without_history_is_uniform() {
    let p = Predictor::new(grid(2, 2), 2, DEFAULT_DECAY).unwrap();
    let report = p.predict(1).unwrap();
    assert_eq!(report.ue_areas[0], vec![0.25; 4]);
    assert!(report.issuance.iter().flatten().all(|&q| q == 0.5));
}

#[test]
fn predictor_tracks_stationary_issuance() {
    let q = 0.3;
    let trials = 50;
    let mut total = 0.0;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + trial);
        let mut p = Predictor::new(grid(1, 1), 1, DEFAULT_DECAY).unwrap();
        let ue = [UeState { ue: 0, area: 0, heading: Heading::E }];
        for _ in 0..300 {
            let issued: Vec<(usize, usize)> = if rng.random_bool(q) { vec![(0, 0)] } else { vec![] };
            p.observe(&ue, &issued).unwrap();
        }
        total += p.issuance_rate(0, 0);
    }
    let mean = total / trials as f64;
    assert!((mean - q).abs() <= 0.05, "mean estimate {mean}");
}

#[test]
fn predicted_distributions_are_proper() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let g = grid(rng.random_range(1..5), rng.random_range(1..5));
        let state = UeState {
            ue: 0,
            area: rng.random_range(0..g.len()),
            heading: Heading::ALL[rng.random_range(0..4)],
        };
        for steps in 0..6 {
            let dist = area_distribution_after(&g, &state, steps);
            assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(dist.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
        // One step agrees with the simulator's own law.
        let ours = area_distribution_after(&g, &state, 1);
        let sim = next_area_distribution(&state, &g);
        for a in 0..g.len() {
            assert!((ours[a] - sim[a]).abs() < 1e-12);
        }
        let mut p = Predictor::new(g.clone(), 2, DEFAULT_DECAY).unwrap();
        p.observe(&[state.clone()], &[(0, 1)]).unwrap();
        let report = p.predict(1).unwrap();
        for l in &report.likely {
            assert!((0.0..=1.0).contains(&l.probability));
        }
        assert!(report.likely.windows(2).all(|w| w[0].probability >= w[1].probability));
    }
}

/// A UE bouncing along a 1×3 row (areas 0, 1, 2, 1, 0, ...) issuing one
/// single-frame request every frame, an RSU over area 2 and one UAV
/// starting there. The middle area sees a request every other frame.
fn bouncing_world(frames: usize) -> World {
    let mut inst = hand_instance();
    inst.time.total_frames = frames;
    inst.grid = grid(1, 3);
    inst.nodes[0].fixed_area = Some(2);
    inst.nodes[1].start_area = Some(2);
    let template = inst.requests[0].clone();
    inst.requests = (0..frames)
        .map(|t| aero_orch::model::Request {
            id: t,
            entry_frame: t,
            active_window: (t, t + 1),
            ..template.clone()
        })
        .collect();
    World::realize(&inst, None).unwrap()
}

/// Coverage minus weighted movement of a UAV trajectory, one area per frame.
fn trajectory_objective(world: &World, uav_areas: &[usize], alpha: f64) -> f64 {
    let inst = &world.instance;
    let uav = &inst.nodes[1];
    let mut prev = uav.initial_area();
    let mut total = 0.0;
    for (t, &a) in uav_areas.iter().enumerate() {
        let moved = if a == prev {
            0.0
        } else {
            relocation_energy(uav, &inst.grid, prev, a).unwrap()
        };
        prev = a;
        let nodes = areas(&[(0, 2), (1, a)]);
        let ue_areas = [world.ue_area(t, 0)];
        let poa = select_poa(&ue_areas, &nodes, &[50.0, 50.0], &[0.0], &BTreeMap::new());
        let connected = world.active_requests(t).len() * usize::from(poa[0].is_some());
        total += tp_reward(connected, moved, alpha);
    }
    total
}

#[test]
fn trained_trajectory_beats_myopic_chasing() {
    let frames = 200;
    let world = bouncing_world(frames);
    let trace: Vec<usize> = (0..frames).map(|t| world.ue_area(t, 0)).collect();
    assert_eq!(&trace[..5], &[0, 1, 2, 1, 0]);

    // Myopic: send the UAV to wherever demand went uncovered last frame.
    let mut myopic = Vec::with_capacity(frames);
    let mut at = world.instance.nodes[1].initial_area();
    for t in 0..frames {
        if t > 0 && trace[t - 1] != 2 {
            at = trace[t - 1];
        }
        myopic.push(at);
    }

    let config = OrchestratorConfig::toy();
    let inst = &world.instance;
    let agents = Agents::new(inst, &config.agents, inst.seeds).unwrap();
    let (agents, _) = aero_orch::harness::train_agents(inst, None, &config, agents, 5, 1).unwrap();
    let eval = OrchestratorConfig { learn: false, ..config.clone() };
    let (episode, _) = run_episode(&world, &eval, PolicyKind::Perfect, agents, None).unwrap();
    let learned: Vec<usize> = episode.trace.iter().map(|f| f.allocation.area_of(f.frame, 1).unwrap()).collect();

    let ours = trajectory_objective(&world, &learned, config.alpha);
    let theirs = trajectory_objective(&world, &myopic, config.alpha);
    let reported: f64 = episode.trace.iter().map(|f| f.rewards.tp).sum();
    assert!((ours - reported).abs() < 1e-6 * reported.abs().max(1.0));
    assert!(ours >= theirs, "trained {ours} vs myopic {theirs}");
}
