use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::energy::{acceptance, link_loads, request_latency_with, validate_structure};
use crate::environment::World;
use crate::error::Result;
use crate::model::{Allocation, NodeKind};

/// Relative slack on capacity and latency inequalities, absorbing
/// floating-point summation order.
pub const CAPACITY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constraint {
    /// Acceptance is defined as a product; it cannot be violated and is
    /// listed for completeness.
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    C9,
    C10,
    C11,
    C12,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entity {
    RequestSlot { frame: usize, slot: usize, request: usize },
    ChannelAreaSlot { frame: usize, slot: usize, channel: usize, area: usize },
    FunctionFrame { frame: usize, function: usize },
    RequestFunction { frame: usize, request: usize, function: usize },
    RequestFrame { frame: usize, request: usize },
    NodeFrame { frame: usize, node: usize },
    LinkFrame { frame: usize, link: usize },
    UeFrame { frame: usize, ue: usize },
    Request { request: usize },
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Entity::RequestSlot { frame, slot, request } => {
                write!(f, "frame {frame} slot {slot} request {request}")
            }
            Entity::ChannelAreaSlot { frame, slot, channel, area } => {
                write!(f, "frame {frame} slot {slot} channel {channel} area {area}")
            }
            Entity::FunctionFrame { frame, function } => {
                write!(f, "frame {frame} function {function}")
            }
            Entity::RequestFunction { frame, request, function } => {
                write!(f, "frame {frame} request {request} function {function}")
            }
            Entity::RequestFrame { frame, request } => write!(f, "frame {frame} request {request}"),
            Entity::NodeFrame { frame, node } => write!(f, "frame {frame} node {node}"),
            Entity::LinkFrame { frame, link } => write!(f, "frame {frame} link {link}"),
            Entity::UeFrame { frame, ue } => write!(f, "frame {frame} ue {ue}"),
            Entity::Request { request } => write!(f, "request {request}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintViolation {
    pub constraint: Constraint,
    pub entity: Entity,
    pub detail: String,
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.constraint, self.entity, self.detail)
    }
}

/// `lhs > rhs` beyond [`CAPACITY_SLACK`].
pub fn exceeds(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + CAPACITY_SLACK * rhs.abs().max(1.0)
}

struct Checker<'a> {
    alloc: &'a Allocation,
    world: &'a World,
    out: Vec<ConstraintViolation>,
}

impl Checker<'_> {
    fn push(&mut self, constraint: Constraint, entity: Entity, detail: String) {
        self.out.push(ConstraintViolation {
            constraint,
            entity,
            detail,
        });
    }

    fn ue_of(&self, request: usize) -> usize {
        self.world.request(request).ue
    }

    fn c3(&mut self, frames: &BTreeSet<usize>) {
        let mut per: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
        for &(t, s, r, _) in self.alloc.z_channel.iter().filter(|k| frames.contains(&k.0)) {
            *per.entry((t, s, r)).or_default() += 1;
        }
        for ((frame, slot, request), n) in per {
            if n > 1 {
                self.push(
                    Constraint::C3,
                    Entity::RequestSlot { frame, slot, request },
                    format!("{n} channels in one slot"),
                );
            }
        }
    }

    fn c4(&mut self, frames: &BTreeSet<usize>) {
        let mut per: BTreeMap<(usize, usize, usize, usize), Vec<usize>> = BTreeMap::new();
        for &(t, s, r, c) in self.alloc.z_channel.iter().filter(|k| frames.contains(&k.0)) {
            let area = self.world.ue_area(t, self.ue_of(r));
            per.entry((t, s, c, area)).or_default().push(r);
        }
        for ((frame, slot, channel, area), rs) in per {
            if rs.len() > 1 {
                self.push(
                    Constraint::C4,
                    Entity::ChannelAreaSlot { frame, slot, channel, area },
                    format!("requests {rs:?} collide"),
                );
            }
        }
    }

    fn c5(&mut self, frames: &BTreeSet<usize>) {
        let nf = self.world.instance.function_count();
        for &t in frames {
            let active = self.world.active_requests(t).len();
            if active == 0 {
                continue;
            }
            for f in 0..nf {
                let selecting = self
                    .alloc
                    .x_select
                    .range((t, 0, 0)..=(t, usize::MAX, usize::MAX))
                    .filter(|k| k.2 == f)
                    .count();
                let hosts = self.alloc.hosts(t, f).len();
                if (hosts as f64) < selecting as f64 / active as f64 {
                    self.push(
                        Constraint::C5,
                        Entity::FunctionFrame { frame: t, function: f },
                        format!("selected by {selecting} requests but not deployed"),
                    );
                }
            }
        }
    }

    fn c6(&mut self, frames: &BTreeSet<usize>) {
        let world = self.world;
        let mut found = Vec::new();
        for &(t, r, f) in self.alloc.x_select.iter().filter(|k| frames.contains(&k.0)) {
            let req = world.request(r);
            let area = world.ue_area(t, req.ue);
            let good = self
                .alloc
                .blocks_of(t, r)
                .iter()
                .filter(|(s, c)| world.quality(t, *s, *c, area))
                .count();
            if (good as f64) / (req.required_slots as f64) < 1.0 {
                found.push((
                    Entity::RequestFunction { frame: t, request: r, function: f },
                    format!("{good} quality slots, {} required", req.required_slots),
                ));
            }
        }
        for (e, d) in found {
            self.push(Constraint::C6, e, d);
        }
    }

    fn c7(&mut self, accepted: &[usize]) {
        let world = self.world;
        for &r in accepted {
            let req = world.request(r);
            let service = world.instance.service_of(req);
            let head = self.alloc.poas_of(req.entry_frame, req.ue);
            let tail = self.alloc.poas_of(req.last_frame(), req.ue);
            for t in req.frames() {
                let entity = Entity::RequestFrame { frame: t, request: r };
                let (&[h], &[tl]) = (head.as_slice(), tail.as_slice()) else {
                    self.push(Constraint::C7, entity, "no unique attachment at window ends".into());
                    continue;
                };
                let chosen = self.alloc.paths_of(t, r);
                let matching = chosen
                    .iter()
                    .filter(|&&p| {
                        let path = &world.paths.paths[p];
                        path.head() == h
                            && path.tail() == tl
                            && path.visits_in_order(&service.functions, |f| self.alloc.hosts(t, f))
                    })
                    .count();
                if matching != 1 || chosen.len() != 1 {
                    self.push(
                        Constraint::C7,
                        entity,
                        format!("{} paths chosen, {matching} valid", chosen.len()),
                    );
                }
            }
        }
    }

    fn c8(&mut self, frames: &BTreeSet<usize>) {
        let inst = &self.world.instance;
        let mut load: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(t, r, f) in self.alloc.x_select.iter().filter(|k| frames.contains(&k.0)) {
            let req = &inst.requests[r];
            let demand = req.capacity_for(inst.service_of(req), f);
            for n in self.alloc.hosts(t, f) {
                *load.entry((t, n)).or_default() += demand;
            }
        }
        for ((frame, node), used) in load {
            let cap = inst.nodes[node].processing_capacity;
            if exceeds(used, cap) {
                self.push(
                    Constraint::C8,
                    Entity::NodeFrame { frame, node },
                    format!("load {used:.3} exceeds capacity {cap:.3}"),
                );
            }
        }
    }

    fn c9(&mut self, frames: &BTreeSet<usize>, loads: &[Vec<f64>]) {
        for &t in frames {
            for l in &self.world.instance.links {
                let used = loads[t][l.id];
                if exceeds(used, l.bandwidth_capacity) {
                    self.push(
                        Constraint::C9,
                        Entity::LinkFrame { frame: t, link: l.id },
                        format!("load {used:.3} exceeds bandwidth {:.3}", l.bandwidth_capacity),
                    );
                }
            }
        }
    }

    fn c10(&mut self, frames: &BTreeSet<usize>) {
        for &t in frames {
            for node in &self.world.instance.nodes {
                let areas = self.alloc.areas_of(t, node.id);
                let entity = Entity::NodeFrame { frame: t, node: node.id };
                if areas.len() != 1 {
                    self.push(Constraint::C10, entity, format!("{} areas", areas.len()));
                } else if node.kind != NodeKind::Uav && node.fixed_area != Some(areas[0]) {
                    self.push(Constraint::C10, entity, "fixed node away from its area".into());
                }
            }
        }
    }

    fn c11(&mut self, frames: &BTreeSet<usize>) {
        let inst = &self.world.instance;
        let mut per: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for &(t, u, n) in self.alloc.b_poa.iter().filter(|k| frames.contains(&k.0)) {
            per.entry((t, u)).or_default().push(n);
        }
        for ((frame, ue), nodes) in per {
            let entity = Entity::UeFrame { frame, ue };
            let area = self.world.ue_area(frame, ue);
            if nodes.len() > 1 {
                self.push(Constraint::C11, entity, format!("{} attachments", nodes.len()));
                continue;
            }
            let n = nodes[0];
            if !inst.nodes[n].kind.is_radio() {
                self.push(Constraint::C11, entity, format!("node {n} has no radio"));
            } else if self.alloc.area_of(frame, n) != Some(area) {
                self.push(Constraint::C11, entity, format!("node {n} not in area {area}"));
            }
        }
    }

    fn c12(&mut self, accepted: &[usize], loads: &[Vec<f64>]) {
        for &r in accepted {
            let latency = request_latency_with(self.alloc, self.world, loads, r);
            let budget = self.world.request(r).latency_req;
            if exceeds(latency, budget) {
                self.push(
                    Constraint::C12,
                    Entity::Request { request: r },
                    format!("latency {latency:.3} ms exceeds {budget:.3} ms"),
                );
            }
        }
    }
}

/// Ids of accepted requests.
pub fn accepted_requests(alloc: &Allocation, world: &World) -> Vec<usize> {
    (0..world.requests().len())
        .filter(|&r| acceptance(alloc, world, r))
        .collect()
}

/// Evaluates C3 to C12 over the whole horizon. An empty list means the
/// allocation is feasible. Fails only on a structurally invalid allocation.
pub fn check_constraints(alloc: &Allocation, world: &World) -> Result<Vec<ConstraintViolation>> {
    validate_structure(alloc, world)?;
    let frames: BTreeSet<usize> = (0..world.frames()).collect();
    let accepted = accepted_requests(alloc, world);
    let loads = link_loads(alloc, world);
    let mut ck = Checker {
        alloc,
        world,
        out: Vec::new(),
    };
    ck.c3(&frames);
    ck.c4(&frames);
    ck.c5(&frames);
    ck.c6(&frames);
    ck.c7(&accepted);
    ck.c8(&frames);
    ck.c9(&frames, &loads);
    ck.c10(&frames);
    ck.c11(&frames);
    ck.c12(&accepted, &loads);
    Ok(ck.out)
}

/// The per-frame constraints (C3, C4, C5, C6, C8, C9, C10, C11) restricted
/// to one frame. Window-level C7 and C12 need the full horizon.
pub fn check_frame(alloc: &Allocation, world: &World, frame: usize) -> Result<Vec<ConstraintViolation>> {
    validate_structure(alloc, world)?;
    let frames: BTreeSet<usize> = [frame].into();
    let loads = link_loads(alloc, world);
    let mut ck = Checker {
        alloc,
        world,
        out: Vec::new(),
    };
    ck.c3(&frames);
    ck.c4(&frames);
    ck.c5(&frames);
    ck.c6(&frames);
    ck.c8(&frames);
    ck.c9(&frames, &loads);
    ck.c10(&frames);
    ck.c11(&frames);
    Ok(ck.out)
}
