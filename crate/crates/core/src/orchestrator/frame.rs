use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{Agents, OrchestratorConfig, Phase, PolicyKind};
use crate::agents::{
    area_demand, area_distribution_after, cheapest, function_demand, pl_reward, pl_route_with,
    place_functions, select_poa, tp_encode, tp_reward, Placement, RouteRequest, TpAction, TpFrame,
};
use crate::allocate::{
    acceptance, check_frame, frame_link_latencies, link_loads, request_latency, ConstraintViolation,
    EnergyBreakdown,
};
use crate::environment::{relocation_energy, World};
use crate::error::{Error, Result};
use crate::mac::{
    allocate_channels, allocate_channels_random, compute_priorities, mac_reward, observations_at, quota_fraction,
    ChannelBeliefTable,
};
use crate::model::{Allocation, NodeKind};
use crate::rng::{SeedBundle, SimRng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailReason {
    /// The window extends past the horizon.
    OutsideHorizon,
    /// No radio node covered the UE.
    Unbound,
    /// The UE's attachment at the last window frame differs from the
    /// planned tail.
    TailMismatch,
    /// Too few quality slots in a frame.
    ChannelQuota,
    /// A function of the chain could not be placed.
    Placement,
    /// No feasible path.
    Routing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RequestStatus {
    InProgress { head: usize, tail: usize, latency: f64 },
    Completed { latency: f64 },
    Failed { frame: usize, reason: FailReason },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rewards {
    pub tp: f64,
    pub mac: f64,
    pub pl: f64,
    pub hl: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    /// Requests whose window ended this frame with every frame served.
    pub accepted: Vec<usize>,
    pub energy: EnergyBreakdown,
    /// End-to-end latency of each request in `accepted`.
    pub latencies: Vec<(usize, f64)>,
    pub failed: Vec<(usize, FailReason)>,
    /// Mean forecast probability of the UEs' actual areas.
    pub prediction_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameOutcome {
    pub frame: usize,
    pub phase: Phase,
    /// Decisions of this frame. Selections of requests that fail in a later
    /// frame are withdrawn from the episode allocation, not from here.
    pub allocation: Allocation,
    pub rewards: Rewards,
    /// Reward the trajectory agent is trained on: R_TP, or R_HL in the
    /// hierarchical phase.
    pub training_reward: f64,
    pub metrics: FrameMetrics,
    pub violations: Vec<ConstraintViolation>,
}

/// Everything a controller carries between frames of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeState {
    /// Next frame to run.
    pub frame: usize,
    pub allocation: Allocation,
    pub beliefs: ChannelBeliefTable,
    pub status: BTreeMap<usize, RequestStatus>,
    /// Trajectory observations of past frames, oldest first, at most ℋ.
    pub history: Vec<TpFrame>,
    /// UAV areas after the last frame, UAVs in id order.
    pub uav_areas: Vec<usize>,
    policy_rng: PolicyRngs,
}

/// Random-baseline generators, one per decision kind, so that changing one
/// kind of decision leaves the draws of the others unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PolicyRngs {
    trajectory: SimRng,
    channels: SimRng,
    placement: SimRng,
    routing: SimRng,
}

impl PolicyRngs {
    fn new(seeds: SeedBundle) -> Self {
        let sub = |k| seeds.substream(Stream::Policy, k);
        PolicyRngs {
            trajectory: sub(0),
            channels: sub(1),
            placement: sub(2),
            routing: sub(3),
        }
    }
}

impl EpisodeState {
    pub fn new(world: &World, config: &OrchestratorConfig) -> Result<Self> {
        let inst = &world.instance;
        Ok(EpisodeState {
            frame: 0,
            allocation: Allocation::new(),
            beliefs: ChannelBeliefTable::new(inst.channels.len(), inst.grid.len(), config.agents.lambda)?,
            status: BTreeMap::new(),
            history: Vec::new(),
            uav_areas: inst
                .nodes
                .iter()
                .filter(|n| n.is_uav())
                .map(|n| n.initial_area())
                .collect(),
            policy_rng: PolicyRngs::new(inst.seeds),
        })
    }

    fn fail(&mut self, request: usize, frame: usize, reason: FailReason, failed: &mut Vec<(usize, FailReason)>) {
        self.status.insert(request, RequestStatus::Failed { frame, reason });
        self.allocation.x_select.retain(|k| k.1 != request);
        failed.push((request, reason));
    }

    fn in_progress(&self, request: usize) -> Option<(usize, usize, f64)> {
        match self.status.get(&request) {
            Some(&RequestStatus::InProgress { head, tail, latency }) => Some((head, tail, latency)),
            _ => None,
        }
    }
}

/// Predicted attachment at the request's last frame: the current one when
/// the UE's most likely final area is its current area, otherwise a radio
/// node now in that area (fixed nodes first, then lowest id).
fn predict_tail(world: &World, frame: usize, request: usize, head: usize, node_areas: &BTreeMap<usize, usize>) -> usize {
    let r = world.request(request);
    let steps = r.last_frame() - frame;
    if steps == 0 {
        return head;
    }
    let state = &world.ue_trace[frame][r.ue];
    let dist = area_distribution_after(&world.instance.grid, state, steps);
    let best = (0..dist.len())
        .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
        .unwrap_or(state.area);
    if best == state.area {
        return head;
    }
    let nodes = &world.instance.nodes;
    node_areas
        .iter()
        .filter(|(_, &a)| a == best)
        .map(|(&n, _)| n)
        .min_by_key(|&n| (nodes[n].kind == NodeKind::Uav, n))
        .unwrap_or(head)
}

fn uniform<T: Copy>(rng: &mut SimRng, items: &[T]) -> Option<T> {
    (!items.is_empty()).then(|| items[rng.random_range(0..items.len())])
}

/// Runs one frame of the pipeline: predictor, trajectory and attachment,
/// channel access, placement and routing, rewards and training.
pub fn run_frame(
    world: &World,
    agents: &mut Agents,
    state: &mut EpisodeState,
    policy: PolicyKind,
    replay: Option<&Allocation>,
    config: &OrchestratorConfig,
) -> Result<FrameOutcome> {
    let t = state.frame;
    if t >= world.frames() {
        return Err(Error::Argument(format!("frame {t} beyond horizon {}", world.frames())));
    }
    let phase = config.phase(t, world.frames());
    let outcome = match policy {
        PolicyKind::OracleReplay => {
            let cert = replay.ok_or_else(|| Error::Argument("oracle replay needs an allocation".into()))?;
            replay_frame(world, state, cert, phase, config)?
        }
        _ => decide_frame(world, agents, state, policy, phase, config)?,
    };
    state.frame += 1;
    Ok(outcome)
}

fn decide_frame(
    world: &World,
    agents: &mut Agents,
    state: &mut EpisodeState,
    policy: PolicyKind,
    phase: Phase,
    config: &OrchestratorConfig,
) -> Result<FrameOutcome> {
    let t = state.frame;
    let inst = &world.instance;
    let alpha = config.alpha;
    let perfect = policy == PolicyKind::Perfect;
    let train = perfect && config.learn;
    let mut failed = Vec::new();

    // Information gathering: the predictor has seen frames before t.
    let report = agents.predictor.predict(inst.ues.len())?;
    let prediction_score = if inst.ues.is_empty() {
        0.0
    } else {
        (0..inst.ues.len())
            .map(|u| report.ue_areas[u][world.ue_area(t, u)])
            .sum::<f64>()
            / inst.ues.len() as f64
    };

    // Trajectory planning on the last ℋ frames.
    let (areas, uavs) = (inst.grid.len(), state.uav_areas.len());
    let tp_state = tp_encode(&state.history, config.agents.history, areas, uavs)?;
    let action = match policy {
        PolicyKind::Perfect if config.learn => agents.tp.step(&tp_state)?,
        PolicyKind::Perfect => agents.tp.greedy(&tp_state)?,
        _ => TpAction {
            areas: (0..uavs).map(|_| state.policy_rng.trajectory.random_range(0..areas)).collect(),
        },
    };
    let mut movement = 0.0;
    let mut uav_k = 0;
    let mut node_areas = BTreeMap::new();
    for node in &inst.nodes {
        let area = match node.kind {
            NodeKind::Uav => {
                let (from, to) = (state.uav_areas[uav_k], action.areas[uav_k]);
                if from != to {
                    movement += relocation_energy(node, &inst.grid, from, to)?;
                }
                uav_k += 1;
                to
            }
            _ => node.initial_area(),
        };
        state.allocation.set_area(t, node.id, area);
        if node.kind.is_radio() {
            node_areas.insert(node.id, area);
        }
    }

    // Attachment points, honoring planned tails that end this frame.
    let active = world.active_requests(t);
    for &r in &active {
        let req = world.request(r);
        if req.entry_frame == t && !world.fits_horizon(req) {
            state.fail(r, t, FailReason::OutsideHorizon, &mut failed);
        }
    }
    let mut pinned = BTreeMap::new();
    let mut ue_demand = vec![0.0; inst.ues.len()];
    for &r in &active {
        let req = world.request(r);
        let open = req.entry_frame == t && world.fits_horizon(req) || state.in_progress(r).is_some();
        if open {
            ue_demand[req.ue] += req.capacity_req.iter().sum::<f64>();
        }
        if let Some((_, tail, _)) = state.in_progress(r) {
            if req.last_frame() == t {
                pinned.entry(req.ue).or_insert(tail);
            }
        }
    }
    let ue_areas: Vec<usize> = (0..inst.ues.len()).map(|u| world.ue_area(t, u)).collect();
    let residual: Vec<f64> = inst.nodes.iter().map(|n| n.processing_capacity).collect();
    let poa = select_poa(&ue_areas, &node_areas, &residual, &ue_demand, &pinned);
    for (u, p) in poa.iter().enumerate() {
        if let Some(n) = p {
            state.allocation.set_poa(t, u, *n);
        }
    }
    let connected = active.iter().filter(|&&r| poa[world.request(r).ue].is_some()).count();
    let r_tp = tp_reward(connected, movement, alpha);

    let mut scheduled = Vec::new();
    for &r in &active {
        let req = world.request(r);
        let bound = poa[req.ue];
        if req.entry_frame == t && world.fits_horizon(req) {
            match bound {
                Some(head) => {
                    let tail = predict_tail(world, t, r, head, &node_areas);
                    state.status.insert(r, RequestStatus::InProgress { head, tail, latency: 0.0 });
                }
                None => {
                    state.fail(r, t, FailReason::Unbound, &mut failed);
                    continue;
                }
            }
        }
        let Some((_, tail, _)) = state.in_progress(r) else {
            continue;
        };
        match bound {
            None => state.fail(r, t, FailReason::Unbound, &mut failed),
            Some(n) if req.last_frame() == t && n != tail => {
                state.fail(r, t, FailReason::TailMismatch, &mut failed)
            }
            Some(_) => scheduled.push(r),
        }
    }

    // Channel access on beliefs updated with the previous frame.
    if t > 0 {
        let seen: BTreeSet<usize> = inst
            .nodes
            .iter()
            .filter(|n| n.kind.is_radio())
            .filter_map(|n| state.allocation.area_of(t - 1, n.id))
            .collect();
        state.beliefs.observe_and_update(&observations_at(world, t - 1, &seen))?;
    }
    let attachment: BTreeMap<usize, usize> = scheduled
        .iter()
        .map(|&r| (r, poa[world.request(r).ue].expect("scheduled requests are bound")))
        .collect();
    let priorities = compute_priorities(scheduled.iter().map(|&r| world.request(r)), t);
    let grid = if perfect {
        allocate_channels(&node_areas, &attachment, &priorities, &state.beliefs, world.slots())
    } else {
        let nc = inst.channels.len();
        allocate_channels_random(&node_areas, &attachment, &priorities, nc, world.slots(), &mut state.policy_rng.channels)
    };
    state.allocation.z_channel.extend(grid.to_decisions(t));
    let r_mac = mac_reward(&grid, world, t, &scheduled);
    let mut served = Vec::new();
    for &r in &scheduled {
        if quota_fraction(world, t, r, &grid.blocks_of(r)) >= 1.0 {
            served.push(r);
        } else {
            state.fail(r, t, FailReason::ChannelQuota, &mut failed);
        }
    }

    // Placement of the served demand, then routing.
    let demand = function_demand(world, &served);
    let placement: Placement = match policy {
        PolicyKind::Perfect => agents.pl.place(&demand, &inst.nodes, config.learn)?,
        _ => {
            let rng = &mut state.policy_rng.placement;
            place_functions(&demand, &inst.nodes, |_, mask| {
                let valid: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
                uniform(rng, &valid).ok_or(Error::NoValidAction)
            })?
        }
    };
    let mut routable = Vec::new();
    for &r in &served {
        let chain = &inst.service_of(world.request(r)).functions;
        if chain.iter().all(|f| placement.hosts.contains_key(f)) {
            let (head, tail, latency) = state.in_progress(r).expect("served requests are in progress");
            routable.push(RouteRequest {
                request: r,
                head,
                tail,
                latency_left: world.request(r).latency_req - latency,
            });
        } else {
            state.fail(r, t, FailReason::Placement, &mut failed);
        }
    }
    let loads = link_loads(&state.allocation, world);
    let latency = frame_link_latencies(&loads, world, t);
    let mut link_load = vec![0.0; inst.links.len()];
    let routes = {
        let rng = &mut state.policy_rng.routing;
        pl_route_with(world, &routable, &placement.hosts, &mut link_load, &latency, |c| {
            if perfect {
                cheapest(c)
            } else {
                rng.random_range(0..c.len())
            }
        })
    };
    let mut used_functions = BTreeSet::new();
    let mut selected = 0;
    let mut link_energy = 0.0;
    let mut accepted = Vec::new();
    let mut latencies = Vec::new();
    for d in &routes {
        let r = d.request;
        let Some(choice) = d.choice else {
            state.fail(r, t, FailReason::Routing, &mut failed);
            continue;
        };
        let req = world.request(r);
        let chain = &inst.service_of(req).functions;
        for &f in chain {
            state.allocation.x_select.insert((t, r, f));
            used_functions.insert(f);
        }
        state.allocation.r_path.insert((t, r, choice.path));
        selected += 1;
        link_energy += choice.energy;
        let (head, tail, so_far) = state.in_progress(r).expect("routed requests are in progress");
        let total = so_far + choice.latency;
        if req.last_frame() == t {
            state.status.insert(r, RequestStatus::Completed { latency: total });
            accepted.push(r);
            latencies.push((r, total));
        } else {
            state.status.insert(r, RequestStatus::InProgress { head, tail, latency: total });
        }
    }
    let mut placement_energy = 0.0;
    for (&f, &n) in &placement.hosts {
        if used_functions.contains(&f) {
            state.allocation.y_place.insert((t, f, n));
            placement_energy += inst.nodes[n].deploy_energy;
        }
    }
    let failed_here = failed
        .iter()
        .filter(|(_, why)| matches!(why, FailReason::Placement | FailReason::Routing))
        .count();
    let r_pl = pl_reward(selected, placement_energy, link_energy, failed_here, alpha, config.agents.routing_penalty);
    let r_hl = config.combined_reward(r_tp, r_mac, r_pl);
    let (train_tp, train_pl) = match phase {
        Phase::LowLevel => (r_tp, r_pl),
        Phase::Hierarchical => (r_hl, r_hl),
    };

    // Observation of frame t closes the trajectory transition.
    state.history.push(TpFrame {
        demand: area_demand(world, t),
        uav_areas: action.areas.clone(),
    });
    if state.history.len() > config.agents.history {
        state.history.remove(0);
    }
    state.uav_areas = action.areas.clone();
    if train {
        let next = tp_encode(&state.history, config.agents.history, areas, uavs)?;
        agents.tp.remember(&tp_state, &action, train_tp, &next)?;
        agents.tp.learn()?;
        agents.pl.remember(&placement, train_pl)?;
        agents.pl.learn()?;
    }
    let issued: Vec<(usize, usize)> = world
        .requests()
        .iter()
        .filter(|r| r.entry_frame == t)
        .map(|r| (r.ue, r.service))
        .collect();
    agents.predictor.observe(&world.ue_trace[t], &issued)?;

    let energy = EnergyBreakdown {
        placement: placement_energy,
        movement,
        link: link_energy,
        channel: grid.cells().map(|(_, c, _, _)| inst.channels[c].use_energy).sum(),
    };
    finish(
        world,
        state,
        phase,
        Rewards {
            tp: r_tp,
            mac: r_mac,
            pl: r_pl,
            hl: r_hl,
        },
        train_tp,
        FrameMetrics {
            accepted,
            energy,
            latencies,
            failed,
            prediction_score,
        },
        config,
    )
}

fn finish(
    world: &World,
    state: &EpisodeState,
    phase: Phase,
    rewards: Rewards,
    training_reward: f64,
    metrics: FrameMetrics,
    config: &OrchestratorConfig,
) -> Result<FrameOutcome> {
    let t = state.frame;
    let violations = check_frame(&state.allocation, world, t)?;
    if !violations.is_empty() {
        let listing: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        if config.strict {
            panic!("frame {t} violates constraints: {}", listing.join("; "));
        }
        eprintln!("warning: frame {t} violates constraints: {}", listing.join("; "));
    }
    Ok(FrameOutcome {
        frame: t,
        phase,
        allocation: state.allocation.frame_slice(t),
        rewards,
        training_reward,
        metrics,
        violations,
    })
}

/// Replays one frame of a fixed allocation, scoring it like a decided one.
fn replay_frame(
    world: &World,
    state: &mut EpisodeState,
    cert: &Allocation,
    phase: Phase,
    config: &OrchestratorConfig,
) -> Result<FrameOutcome> {
    let t = state.frame;
    let inst = &world.instance;
    let slice = cert.frame_slice(t);
    state.allocation.merge(&slice);
    let mut movement = 0.0;
    let mut uav_k = 0;
    for node in inst.nodes.iter().filter(|n| n.is_uav()) {
        let to = slice
            .area_of(t, node.id)
            .ok_or_else(|| Error::Structural(format!("node {} has no area in frame {t}", node.id)))?;
        let from = state.uav_areas[uav_k];
        if from != to {
            movement += relocation_energy(node, &inst.grid, from, to)?;
        }
        state.uav_areas[uav_k] = to;
        uav_k += 1;
    }
    let active = world.active_requests(t);
    let connected = active
        .iter()
        .filter(|&&r| slice.poa_of(t, world.request(r).ue).is_some())
        .count();
    let with_blocks: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&r| !slice.blocks_of(t, r).is_empty())
        .collect();
    let r_mac = if with_blocks.is_empty() {
        0.0
    } else {
        with_blocks
            .iter()
            .map(|&r| quota_fraction(world, t, r, &slice.blocks_of(t, r)))
            .sum::<f64>()
            / with_blocks.len() as f64
    };
    let selected = active
        .iter()
        .filter(|&&r| {
            let req = world.request(r);
            inst.service_of(req).functions.iter().all(|&f| slice.is_selected(t, r, f))
        })
        .count();
    let placement: f64 = slice.y_place.iter().map(|&(_, _, n)| inst.nodes[n].deploy_energy).sum();
    let link: f64 = slice
        .r_path
        .iter()
        .map(|&(_, _, p)| {
            world.paths.paths[p]
                .distinct_links()
                .iter()
                .map(|&l| inst.links[l].transmit_energy)
                .sum::<f64>()
        })
        .sum();
    let channel: f64 = slice.z_channel.iter().map(|&(_, _, _, c)| inst.channels[c].use_energy).sum();
    let r_tp = tp_reward(connected, movement, config.alpha);
    let r_pl = pl_reward(selected, placement, link, 0, config.alpha, config.agents.routing_penalty);
    let r_hl = config.combined_reward(r_tp, r_mac, r_pl);
    let mut accepted = Vec::new();
    let mut latencies = Vec::new();
    for &r in &active {
        if world.request(r).last_frame() == t && acceptance(&state.allocation, world, r) {
            let latency = request_latency(&state.allocation, world, r);
            accepted.push(r);
            latencies.push((r, latency));
            state.status.insert(r, RequestStatus::Completed { latency });
        }
    }
    let training_reward = match phase {
        Phase::LowLevel => r_tp,
        Phase::Hierarchical => r_hl,
    };
    finish(
        world,
        state,
        phase,
        Rewards {
            tp: r_tp,
            mac: r_mac,
            pl: r_pl,
            hl: r_hl,
        },
        training_reward,
        FrameMetrics {
            accepted,
            energy: EnergyBreakdown {
                placement,
                movement,
                link,
                channel,
            },
            latencies,
            failed: Vec::new(),
            prediction_score: 0.0,
        },
        config,
    )
}
