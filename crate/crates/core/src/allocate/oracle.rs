use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::check::exceeds;
use super::objective::{objective, ObjectiveReport};
use crate::environment::{relocation_energy, World};
use crate::error::{Error, Result};
use crate::model::{Allocation, NodeKind, PathSpec};

/// Size bounds beyond which the exhaustive solvers refuse to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_uavs: usize,
    pub max_areas: usize,
    pub max_channels: usize,
    pub max_slots: usize,
    pub max_frames: usize,
    pub max_requests: usize,
    pub max_functions: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 5,
            max_uavs: 2,
            max_areas: 4,
            max_channels: 2,
            max_slots: 3,
            max_frames: 2,
            max_requests: 2,
            max_functions: 3,
        }
    }
}

impl OracleLimits {
    pub fn admits(&self, world: &World) -> Result<()> {
        let inst = &world.instance;
        let checks = [
            ("nodes", inst.nodes.len(), self.max_nodes),
            ("UAVs", inst.uav_ids().len(), self.max_uavs),
            ("areas", inst.grid.len(), self.max_areas),
            ("channels", inst.channels.len(), self.max_channels),
            ("slots per frame", world.slots(), self.max_slots),
            ("frames", world.frames(), self.max_frames),
            ("requests", inst.requests.len(), self.max_requests),
            ("functions", inst.function_count(), self.max_functions),
        ];
        for (what, have, max) in checks {
            if have > max {
                return Err(Error::Size(format!("{have} {what}, limit {max}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub allocation: Allocation,
    pub report: ObjectiveReport,
    /// Candidate assignments evaluated.
    pub explored: u64,
}

/// Every assignment of UAV areas over the horizon, as `[frame][uav index]`.
pub(crate) fn uav_trajectories(world: &World) -> Vec<Vec<Vec<usize>>> {
    let uavs = world.instance.uav_ids().len();
    let frames = world.frames();
    let areas = world.instance.grid.len();
    let digits = uavs * frames;
    let total = areas.pow(digits as u32);
    (0..total)
        .map(|mut code| {
            let mut traj = vec![vec![0; uavs]; frames];
            for slot in traj.iter_mut().flatten() {
                *slot = code % areas;
                code /= areas;
            }
            traj
        })
        .collect()
}

/// Host sequences that place `chain_len` functions on nodes of `path` at
/// non-decreasing positions, deduplicated.
pub(crate) fn monotone_hosts(path: &PathSpec, chain_len: usize) -> Vec<Vec<usize>> {
    let k = path.node_sequence.len();
    let mut out = BTreeSet::new();
    let mut pos = vec![0usize; chain_len];
    loop {
        out.insert(pos.iter().map(|&i| path.node_sequence[i]).collect::<Vec<_>>());
        // Advance the non-decreasing position vector like an odometer.
        let mut i = chain_len;
        loop {
            if i == 0 {
                return out.into_iter().collect();
            }
            i -= 1;
            if pos[i] + 1 < k {
                pos[i] += 1;
                let v = pos[i];
                for p in pos.iter_mut().skip(i + 1) {
                    *p = v;
                }
                break;
            }
        }
    }
}

/// Energy of a UAV trajectory, starting from the initial areas.
fn trajectory_energy(world: &World, traj: &[Vec<usize>]) -> Result<f64> {
    let inst = &world.instance;
    let mut total = 0.0;
    for (i, uav) in inst.uav_ids().into_iter().enumerate() {
        let node = &inst.nodes[uav];
        let mut prev = node.initial_area();
        for frame in traj {
            if frame[i] != prev {
                total += relocation_energy(node, &inst.grid, prev, frame[i])?;
            }
            prev = frame[i];
        }
    }
    Ok(total)
}

fn node_area(world: &World, traj: &[Vec<usize>], frame: usize, node: usize) -> usize {
    let inst = &world.instance;
    match inst.nodes[node].kind {
        NodeKind::Uav => {
            let idx = inst.uav_ids().iter().position(|u| *u == node).unwrap();
            traj[frame][idx]
        }
        _ => inst.nodes[node].initial_area(),
    }
}

type ZSet = BTreeSet<(usize, usize, usize, usize)>;

/// Resource-block choices for one request in one frame: exactly the
/// required number of quality slots, at most one channel per slot.
fn block_options(world: &World, frame: usize, request: usize) -> Vec<(f64, Vec<(usize, usize)>)> {
    let req = world.request(request);
    let area = world.ue_area(frame, req.ue);
    let chans = world.instance.channels.len();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        world: &World,
        frame: usize,
        area: usize,
        slot: usize,
        need: usize,
        chans: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<(f64, Vec<(usize, usize)>)>,
    ) {
        if cur.len() == need {
            let e = cur.iter().map(|&(_, c)| world.instance.channels[c].use_energy).sum();
            out.push((e, cur.clone()));
            return;
        }
        if slot == world.slots() || world.slots() - slot < need - cur.len() {
            return;
        }
        for c in 0..chans {
            if world.quality(frame, slot, c, area) {
                cur.push((slot, c));
                rec(world, frame, area, slot + 1, need, chans, cur, out);
                cur.pop();
            }
        }
        rec(world, frame, area, slot + 1, need, chans, cur, out);
    }
    rec(world, frame, area, 0, req.required_slots, chans, &mut cur, &mut out);
    out
}

/// Cheapest collision-free resource blocks for the accepted set, or
/// `None` when some request cannot get its quota.
fn channel_min(world: &World, accepted: &[usize], explored: &mut u64) -> Option<(f64, ZSet)> {
    let mut energy = 0.0;
    let mut z = ZSet::new();
    for t in 0..world.frames() {
        let active: Vec<usize> = accepted
            .iter()
            .copied()
            .filter(|&r| world.request(r).is_active(t))
            .collect();
        let options: Vec<_> = active.iter().map(|&r| block_options(world, t, r)).collect();
        let mut best: Option<(f64, ZSet)> = None;
        let mut used: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        let mut picked = Vec::new();
        search_blocks(world, t, &active, &options, 0, 0.0, &mut used, &mut picked, &mut best, explored);
        let (e, zs) = best?;
        energy += e;
        z.extend(zs);
    }
    Some((energy, z))
}

#[allow(clippy::too_many_arguments)]
fn search_blocks(
    world: &World,
    t: usize,
    active: &[usize],
    options: &[Vec<(f64, Vec<(usize, usize)>)>],
    i: usize,
    energy: f64,
    used: &mut BTreeSet<(usize, usize, usize)>,
    picked: &mut Vec<usize>,
    best: &mut Option<(f64, ZSet)>,
    explored: &mut u64,
) {
    if i == active.len() {
        *explored += 1;
        let z: ZSet = picked
            .iter()
            .enumerate()
            .flat_map(|(k, &o)| options[k][o].1.iter().map(move |&(s, c)| (t, s, active[k], c)))
            .collect();
        let better = match best {
            None => true,
            Some((be, bz)) => energy < *be || (energy == *be && z < *bz),
        };
        if better {
            *best = Some((energy, z));
        }
        return;
    }
    let area = world.ue_area(t, world.request(active[i]).ue);
    for (o, (e, blocks)) in options[i].iter().enumerate() {
        // Partial collision check against requests already placed.
        if blocks.iter().any(|&(s, c)| used.contains(&(s, c, area))) {
            continue;
        }
        for &(s, c) in blocks {
            used.insert((s, c, area));
        }
        picked.push(o);
        search_blocks(world, t, active, options, i + 1, energy + e, used, picked, best, explored);
        picked.pop();
        for &(s, c) in blocks {
            used.remove(&(s, c, area));
        }
    }
}

type YSet = BTreeSet<(usize, usize, usize)>;
type RSet = BTreeSet<(usize, usize, usize)>;

#[derive(Clone, Debug)]
struct RoutePartial {
    energy: f64,
    latency: Vec<f64>,
    y: YSet,
    r: RSet,
}

/// `a` makes `b` redundant: no worse on energy and every latency, and
/// not beaten by `b` on the final tie rule.
fn dominates(a: &RoutePartial, b: &RoutePartial) -> bool {
    a.energy <= b.energy
        && a.latency.iter().zip(&b.latency).all(|(x, y)| x <= y)
        && (a.energy < b.energy || (&a.y, &a.r) <= (&b.y, &b.r))
}

/// Route choices for one request: path with the given ends plus a host per
/// chain function along it.
struct RouteOption {
    path: usize,
    hosts: Vec<usize>,
    link_energy: f64,
    links: Vec<usize>,
}

fn route_options(world: &World, request: usize, head: usize, tail: usize) -> Vec<RouteOption> {
    let inst = &world.instance;
    let chain = &inst.service_of(world.request(request)).functions;
    let mut out = Vec::new();
    for p in world.paths.between(head, tail) {
        let links: Vec<usize> = p.distinct_links().into_iter().collect();
        let link_energy = links.iter().map(|&l| inst.links[l].transmit_energy).sum();
        for hosts in monotone_hosts(p, chain.len()) {
            out.push(RouteOption {
                path: p.id,
                hosts,
                link_energy,
                links: links.clone(),
            });
        }
    }
    out
}

struct FrameLeaf {
    energy: f64,
    latency: Vec<f64>,
    loads: Vec<f64>,
    y: YSet,
    r: RSet,
}

struct RouteSearch<'a> {
    world: &'a World,
    t: usize,
    /// Indices into the accepted list of requests active at `t`.
    active: Vec<usize>,
    accepted: &'a [usize],
    options: Vec<&'a [RouteOption]>,
    /// Per-function demand summed over active accepted requests.
    demand: Vec<f64>,
    latency_of_link: Vec<f64>,
    leaves: Vec<FrameLeaf>,
}

impl RouteSearch<'_> {
    fn run(&mut self, explored: &mut u64) {
        let inst = &self.world.instance;
        let mut hosted: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut node_load = vec![0.0; inst.nodes.len()];
        let mut link_load = vec![0.0; inst.links.len()];
        let mut picks = Vec::new();
        self.rec(0, &mut hosted, &mut node_load, &mut link_load, &mut picks, explored);
    }

    fn rec(
        &mut self,
        i: usize,
        hosted: &mut BTreeSet<(usize, usize)>,
        node_load: &mut Vec<f64>,
        link_load: &mut Vec<f64>,
        picks: &mut Vec<usize>,
        explored: &mut u64,
    ) {
        let inst = &self.world.instance;
        if i == self.active.len() {
            *explored += 1;
            let placement: f64 = hosted.iter().map(|&(_, n)| inst.nodes[n].deploy_energy).sum();
            let mut energy = placement;
            let mut latency = vec![0.0; self.accepted.len()];
            let mut r = RSet::new();
            for (k, &o) in picks.iter().enumerate() {
                let opt = &self.options[k][o];
                energy += opt.link_energy;
                let idx = self.active[k];
                latency[idx] = opt.links.iter().map(|&l| self.latency_of_link[l]).sum();
                r.insert((self.t, self.accepted[idx], opt.path));
            }
            let y = hosted.iter().map(|&(f, n)| (self.t, f, n)).collect();
            self.leaves.push(FrameLeaf {
                energy,
                latency,
                loads: link_load.clone(),
                y,
                r,
            });
            return;
        }
        let req = self.world.request(self.accepted[self.active[i]]);
        let chain = inst.service_of(req).functions.clone();
        for o in 0..self.options[i].len() {
            let opt = &self.options[i][o];
            let added: Vec<(usize, usize)> = chain
                .iter()
                .zip(&opt.hosts)
                .map(|(&f, &n)| (f, n))
                .filter(|k| !hosted.contains(k))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let mut ok = true;
            for &(f, n) in &added {
                node_load[n] += self.demand[f];
                if exceeds(node_load[n], inst.nodes[n].processing_capacity) {
                    ok = false;
                }
            }
            for &l in &opt.links {
                link_load[l] += req.bandwidth_req;
                if exceeds(link_load[l], inst.links[l].bandwidth_capacity) {
                    ok = false;
                }
            }
            if ok {
                hosted.extend(added.iter().copied());
                picks.push(o);
                self.rec(i + 1, hosted, node_load, link_load, picks, explored);
                picks.pop();
                for k in &added {
                    hosted.remove(k);
                }
            }
            for &(f, n) in &added {
                node_load[n] -= self.demand[f];
            }
            for &l in &opt.links {
                link_load[l] -= req.bandwidth_req;
            }
        }
    }
}

fn load_key(loads: &[f64]) -> Vec<u64> {
    loads.iter().map(|v| v.to_bits()).collect()
}

/// Cheapest placement and routing for the accepted set with fixed path
/// ends, honouring node and link capacity and the latency budgets.
fn route_min(
    world: &World,
    accepted: &[usize],
    ends: &[(usize, usize)],
    explored: &mut u64,
) -> Option<(f64, YSet, RSet)> {
    let inst = &world.instance;
    let options: Vec<Vec<RouteOption>> = accepted
        .iter()
        .zip(ends)
        .map(|(&r, &(h, t))| route_options(world, r, h, t))
        .collect();
    if options.iter().any(|o| o.is_empty()) {
        return None;
    }
    let budgets: Vec<f64> = accepted.iter().map(|&r| world.request(r).latency_req).collect();
    let zero_loads = vec![0.0; inst.links.len()];
    let mut states: BTreeMap<Vec<u64>, (Vec<f64>, Vec<RoutePartial>)> = BTreeMap::new();
    states.insert(
        load_key(&zero_loads),
        (
            zero_loads,
            vec![RoutePartial {
                energy: 0.0,
                latency: vec![0.0; accepted.len()],
                y: YSet::new(),
                r: RSet::new(),
            }],
        ),
    );
    for t in 0..world.frames() {
        let active: Vec<usize> = (0..accepted.len())
            .filter(|&i| world.request(accepted[i]).is_active(t))
            .collect();
        let mut demand = vec![0.0; inst.function_count()];
        for &i in &active {
            let req = world.request(accepted[i]);
            let service = inst.service_of(req);
            for (k, &f) in service.functions.iter().enumerate() {
                demand[f] += req.capacity_req[k];
            }
        }
        let mut next: BTreeMap<Vec<u64>, (Vec<f64>, Vec<RoutePartial>)> = BTreeMap::new();
        for (prev_loads, partials) in states.values() {
            let latency_of_link: Vec<f64> = inst
                .links
                .iter()
                .map(|l| {
                    let load = if t == 0 { 0.0 } else { prev_loads[l.id] / l.bandwidth_capacity };
                    crate::environment::link_latency(l, load)
                })
                .collect();
            let mut search = RouteSearch {
                world,
                t,
                active: active.clone(),
                accepted,
                options: active.iter().map(|&i| options[i].as_slice()).collect(),
                demand: demand.clone(),
                latency_of_link,
                leaves: Vec::new(),
            };
            search.run(explored);
            for leaf in search.leaves {
                for prev in partials {
                    let latency: Vec<f64> =
                        prev.latency.iter().zip(&leaf.latency).map(|(a, b)| a + b).collect();
                    // Latency only accumulates: prune budget breaches early.
                    if latency.iter().zip(&budgets).any(|(l, b)| exceeds(*l, *b)) {
                        continue;
                    }
                    let mut y = prev.y.clone();
                    y.extend(leaf.y.iter().copied());
                    let mut r = prev.r.clone();
                    r.extend(leaf.r.iter().copied());
                    let cand = RoutePartial {
                        energy: prev.energy + leaf.energy,
                        latency,
                        y,
                        r,
                    };
                    let entry = next
                        .entry(load_key(&leaf.loads))
                        .or_insert_with(|| (leaf.loads.clone(), Vec::new()));
                    insert_pareto(&mut entry.1, cand);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        states = next;
    }
    states
        .into_values()
        .flat_map(|(_, ps)| ps)
        .min_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.y.cmp(&b.y))
                .then_with(|| a.r.cmp(&b.r))
        })
        .map(|p| (p.energy, p.y, p.r))
}

fn insert_pareto(front: &mut Vec<RoutePartial>, cand: RoutePartial) {
    if front.iter().any(|p| dominates(p, &cand)) {
        return;
    }
    front.retain(|p| !dominates(&cand, p));
    front.push(cand);
}

/// Radio nodes covering the UE's area at `frame` under the trajectory.
fn attachment_candidates(world: &World, traj: &[Vec<usize>], frame: usize, ue: usize) -> Vec<usize> {
    let area = world.ue_area(frame, ue);
    world
        .instance
        .nodes
        .iter()
        .filter(|n| n.kind.is_radio() && node_area(world, traj, frame, n.id) == area)
        .map(|n| n.id)
        .collect()
}

/// Positions of every node over the horizon under a UAV trajectory.
pub(crate) fn positions(world: &World, traj: &[Vec<usize>]) -> BTreeSet<(usize, usize, usize)> {
    let mut s = BTreeSet::new();
    for t in 0..world.frames() {
        for n in &world.instance.nodes {
            s.insert((t, n.id, node_area(world, traj, t, n.id)));
        }
    }
    s
}

/// Selections of every function over the window of each accepted request.
pub(crate) fn selections(world: &World, accepted: &[usize]) -> BTreeSet<(usize, usize, usize)> {
    let mut x = BTreeSet::new();
    for &r in accepted {
        let req = world.request(r);
        for t in req.frames() {
            for &f in &world.instance.service_of(req).functions {
                x.insert((t, r, f));
            }
        }
    }
    x
}

/// `(frame, ue)` pairs needing an attachment: the window ends of every
/// accepted request.
pub(crate) fn attachment_points(world: &World, accepted: &[usize]) -> Vec<(usize, usize)> {
    let mut pts = BTreeSet::new();
    for &r in accepted {
        let req = world.request(r);
        pts.insert((req.entry_frame, req.ue));
        pts.insert((req.last_frame(), req.ue));
    }
    pts.into_iter().collect()
}

/// Exact maximizer of the objective on a micro instance. The search
/// decomposes into UAV trajectories, accepted sets and attachments; the
/// channel and routing subproblems are solved exactly and memoized. Ties
/// go to lower energy, then to the lexicographically smaller allocation.
pub fn oracle_solve(world: &World, alpha: f64, limits: &OracleLimits) -> Result<OracleSolution> {
    limits.admits(world)?;
    let eligible: Vec<usize> = world
        .requests()
        .iter()
        .filter(|r| world.fits_horizon(r))
        .map(|r| r.id)
        .collect();
    let mut explored = 0u64;
    let subsets: Vec<Vec<usize>> = (0u32..1 << eligible.len())
        .map(|mask| {
            eligible
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &r)| r)
                .collect()
        })
        .collect();
    let channel: Vec<Option<(f64, ZSet)>> = subsets
        .iter()
        .map(|a| channel_min(world, a, &mut explored))
        .collect();
    let mut route_memo: HashMap<(usize, Vec<(usize, usize)>), Option<(f64, YSet, RSet)>> =
        HashMap::new();

    let mut best: Option<(f64, f64, Allocation)> = None;
    for traj in uav_trajectories(world) {
        let movement = trajectory_energy(world, &traj)?;
        for (ai, accepted) in subsets.iter().enumerate() {
            let Some((chan_e, z)) = &channel[ai] else { continue };
            let bound = accepted.len() as f64 - alpha * (movement + chan_e);
            if let Some((bo, _, _)) = &best {
                if bound < *bo {
                    continue;
                }
            }
            let points = attachment_points(world, accepted);
            let cands: Vec<Vec<usize>> = points
                .iter()
                .map(|&(t, u)| attachment_candidates(world, &traj, t, u))
                .collect();
            if cands.iter().any(|c| c.is_empty()) {
                continue;
            }
            let mut idx = vec![0usize; points.len()];
            loop {
                explored += 1;
                let binding: BTreeMap<(usize, usize), usize> = points
                    .iter()
                    .zip(&idx)
                    .enumerate()
                    .map(|(k, (&p, &i))| (p, cands[k][i]))
                    .collect();
                let ends: Vec<(usize, usize)> = accepted
                    .iter()
                    .map(|&r| {
                        let req = world.request(r);
                        (
                            binding[&(req.entry_frame, req.ue)],
                            binding[&(req.last_frame(), req.ue)],
                        )
                    })
                    .collect();
                let routed = route_memo
                    .entry((ai, ends.clone()))
                    .or_insert_with(|| route_min(world, accepted, &ends, &mut explored))
                    .clone();
                if let Some((route_e, y, r)) = routed {
                    let energy = movement + chan_e + route_e;
                    let value = accepted.len() as f64 - alpha * energy;
                    let contender = match &best {
                        None => true,
                        Some((bo, be, _)) => value > *bo || (value == *bo && energy <= *be),
                    };
                    if contender {
                        let alloc = Allocation {
                            x_select: selections(world, accepted),
                            y_place: y,
                            z_channel: z.clone(),
                            s_area: positions(world, &traj),
                            b_poa: binding.iter().map(|(&(t, u), &n)| (t, u, n)).collect(),
                            r_path: r,
                        };
                        let replace = match &best {
                            None => true,
                            Some((bo, be, ba)) => {
                                value > *bo || energy < *be || (energy == *be && alloc < *ba)
                            }
                        };
                        if replace {
                            best = Some((value, energy, alloc));
                        }
                    }
                }
                // Next attachment combination.
                let mut k = idx.len();
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < cands[k].len() {
                        done = false;
                        break;
                    }
                    idx[k] = 0;
                }
                if done {
                    break;
                }
            }
        }
    }
    let (_, _, allocation) = best.expect("the empty acceptance set is always feasible");
    let report = objective(&allocation, world, alpha)?;
    Ok(OracleSolution {
        allocation,
        report,
        explored,
    })
}
