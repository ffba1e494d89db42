//! Unpruned exhaustive search, kept deliberately naive so it can serve as
//! an independent reference for the decomposed solver.

use std::collections::BTreeSet;

use super::objective::objective;
use super::oracle::{OracleLimits, OracleSolution};
use crate::environment::World;
use crate::error::{Error, Result};
use crate::model::Allocation;

/// Default ceiling on the number of allocations the brute force scores.
pub const DEFAULT_BRUTE_BUDGET: u128 = 300_000;

/// Mixed-radix counter over `radices`; returns false after wrapping.
fn advance(idx: &mut [usize], radices: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < radices[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

struct Domains {
    uav_ids: Vec<usize>,
    areas: usize,
    frames: usize,
    radio: Vec<usize>,
    eligible: Vec<usize>,
}

impl Domains {
    fn new(world: &World) -> Self {
        let inst = &world.instance;
        Domains {
            uav_ids: inst.uav_ids(),
            areas: inst.grid.len(),
            frames: world.frames(),
            radio: inst.nodes.iter().filter(|n| n.kind.is_radio()).map(|n| n.id).collect(),
            eligible: world
                .requests()
                .iter()
                .filter(|r| world.fits_horizon(r))
                .map(|r| r.id)
                .collect(),
        }
    }

    fn accepted(&self, mask: usize) -> Vec<usize> {
        (0..self.eligible.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.eligible[i])
            .collect()
    }
}

fn points(world: &World, accepted: &[usize]) -> Vec<(usize, usize)> {
    let mut pts = BTreeSet::new();
    for &r in accepted {
        let req = world.request(r);
        pts.insert((req.active_window.0, req.ue));
        pts.insert((req.active_window.1 - 1, req.ue));
    }
    pts.into_iter().collect()
}

/// All ways to use exactly `need` slots of a frame, one channel each.
fn block_sets(slots: usize, channels: usize, need: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let radices = vec![channels + 1; slots];
    let mut idx = vec![0; slots];
    loop {
        let used: Vec<(usize, usize)> = idx
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s, c - 1))
            .collect();
        if used.len() == need {
            out.push(used);
        }
        if !advance(&mut idx, &radices) {
            return out;
        }
    }
}

/// Every path with the given ends, paired with every tuple of its nodes
/// as hosts for the chain.
fn route_choices(world: &World, chain_len: usize, head: usize, tail: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for p in &world.paths.paths {
        if p.node_sequence[0] != head || *p.node_sequence.last().unwrap() != tail {
            continue;
        }
        let nodes: Vec<usize> = p.node_sequence.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let radices = vec![nodes.len(); chain_len];
        let mut idx = vec![0; chain_len];
        loop {
            out.push((p.id, idx.iter().map(|&i| nodes[i]).collect()));
            if chain_len == 0 || !advance(&mut idx, &radices) {
                break;
            }
        }
    }
    out
}

/// Calls `visit` for every candidate allocation, or only counts them when
/// `visit` is `None`.
fn enumerate(world: &World, mut visit: Option<&mut dyn FnMut(Allocation)>) -> u128 {
    let inst = &world.instance;
    let d = Domains::new(world);
    let mut count: u128 = 0;
    let traj_radices = vec![d.areas; d.uav_ids.len() * d.frames];
    let mut traj = vec![0; traj_radices.len()];
    loop {
        let mut s_area = BTreeSet::new();
        for t in 0..d.frames {
            for n in &inst.nodes {
                let area = match d.uav_ids.iter().position(|&u| u == n.id) {
                    Some(i) => traj[t * d.uav_ids.len() + i],
                    None => n.initial_area(),
                };
                s_area.insert((t, n.id, area));
            }
        }
        for mask in 0..1usize << d.eligible.len() {
            let accepted = d.accepted(mask);
            let pts = points(world, &accepted);
            let b_radices = vec![d.radio.len(); pts.len()];
            if b_radices.contains(&0) {
                continue;
            }
            let mut b = vec![0; pts.len()];
            loop {
                let binding = |t: usize, u: usize| {
                    let k = pts.iter().position(|&p| p == (t, u)).unwrap();
                    d.radio[b[k]]
                };
                // One decision item per (request, frame) of the window.
                let mut items = Vec::new();
                for &r in &accepted {
                    let req = world.request(r);
                    let chain = &inst.service_of(req).functions;
                    let head = binding(req.active_window.0, req.ue);
                    let tail = binding(req.active_window.1 - 1, req.ue);
                    let blocks = block_sets(world.slots(), inst.channels.len(), req.required_slots);
                    let routes = route_choices(world, chain.len(), head, tail);
                    for t in req.frames() {
                        items.push((r, t, chain.clone(), blocks.clone(), routes.clone()));
                    }
                }
                let radices: Vec<usize> = items.iter().map(|i| i.3.len() * i.4.len()).collect();
                if visit.is_none() {
                    count += radices.iter().map(|&r| r as u128).product::<u128>();
                } else if !radices.contains(&0) {
                    let mut idx = vec![0; items.len()];
                    loop {
                        count += 1;
                        if let Some(visit) = visit.as_mut() {
                            let mut alloc = Allocation {
                                s_area: s_area.clone(),
                                ..Allocation::default()
                            };
                            for (k, &(t, u)) in pts.iter().enumerate() {
                                alloc.b_poa.insert((t, u, d.radio[b[k]]));
                            }
                            for (k, (r, t, chain, blocks, routes)) in items.iter().enumerate() {
                                let (r, t) = (*r, *t);
                                let (bi, ri) = (idx[k] / routes.len(), idx[k] % routes.len());
                                for &f in chain {
                                    alloc.x_select.insert((t, r, f));
                                }
                                for &(s, c) in &blocks[bi] {
                                    alloc.z_channel.insert((t, s, r, c));
                                }
                                let (p, hosts) = &routes[ri];
                                alloc.r_path.insert((t, r, *p));
                                for (&f, &n) in chain.iter().zip(hosts) {
                                    alloc.y_place.insert((t, f, n));
                                }
                            }
                            visit(alloc);
                        }
                        if !advance(&mut idx, &radices) {
                            break;
                        }
                    }
                }
                if !advance(&mut b, &b_radices) {
                    break;
                }
            }
        }
        if !advance(&mut traj, &traj_radices) {
            break;
        }
    }
    count
}

/// Number of allocations [`brute_force_solve`] would score.
pub fn brute_force_size(world: &World) -> u128 {
    enumerate(world, None)
}

/// Scores every candidate allocation with the checker and the objective
/// and keeps the best feasible one, with the same tie rule as
/// [`oracle_solve`](super::oracle_solve). Refuses with [`Error::Size`]
/// when the candidate count exceeds `budget`.
pub fn brute_force_solve(
    world: &World,
    alpha: f64,
    limits: &OracleLimits,
    budget: u128,
) -> Result<OracleSolution> {
    limits.admits(world)?;
    let size = brute_force_size(world);
    if size > budget {
        return Err(Error::Size(format!("{size} candidates, budget {budget}")));
    }
    let mut best: Option<(f64, f64, Allocation)> = None;
    let mut failure = None;
    let mut visit = |alloc: Allocation| {
        if failure.is_some() {
            return;
        }
        let report = match objective(&alloc, world, alpha) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        if !report.feasible() {
            return;
        }
        let (value, energy) = (report.objective_value, report.total_energy);
        let better = match &best {
            None => true,
            Some((bv, be, ba)) => {
                value > *bv || (value == *bv && (energy < *be || (energy == *be && alloc < *ba)))
            }
        };
        if better {
            best = Some((value, energy, alloc));
        }
    };
    enumerate(world, Some(&mut visit));
    if let Some(e) = failure {
        return Err(e);
    }
    let (_, _, allocation) = best.ok_or_else(|| Error::Structural("no feasible allocation".into()))?;
    let report = objective(&allocation, world, alpha)?;
    Ok(OracleSolution {
        allocation,
        report,
        explored: size as u64,
    })
}
