use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::allocate::exceeds;
use crate::environment::World;
use crate::error::{Error, Result};
use crate::learning::{Learner, LearnerConfig, Transition};
use crate::model::NodeSpec;

/// Default reward charged per served request left without a feasible route.
pub const ROUTING_PENALTY: f64 = 1.0;

/// Per-function capacity demanded by `requests`.
pub fn function_demand(world: &World, requests: &[usize]) -> Vec<f64> {
    let inst = &world.instance;
    let mut demand = vec![0.0; inst.function_count()];
    for &r in requests {
        let req = world.request(r);
        for (i, &f) in inst.service_of(req).functions.iter().enumerate() {
            demand[f] += req.capacity_req[i];
        }
    }
    demand
}

/// Demand per function, then (residual capacity, deploy energy) per node.
pub fn pl_state(demand: &[f64], residual: &[f64], nodes: &[NodeSpec]) -> Vec<f64> {
    let mut s = demand.to_vec();
    for (r, n) in residual.iter().zip(nodes) {
        s.push(r.max(0.0));
        s.push(n.deploy_energy);
    }
    s
}

/// Whether `node`'s residual capacity covers the demand of a function.
pub fn capacity_holds(demand: f64, residual: f64) -> bool {
    !exceeds(demand, residual)
}

/// Validity of each (function, node) pair, indexed `f * nodes + n`. A pair
/// is invalid when the function has no demand or the node cannot carry it.
pub fn pl_mask(demand: &[f64], residual: &[f64]) -> Vec<bool> {
    let mut mask = Vec::with_capacity(demand.len() * residual.len());
    for &d in demand {
        for &r in residual {
            mask.push(d > 0.0 && capacity_holds(d, r));
        }
    }
    mask
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementStep {
    pub state: Vec<f64>,
    pub action: usize,
    pub next_state: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Host node per placed function.
    pub hosts: BTreeMap<usize, usize>,
    pub steps: Vec<PlacementStep>,
    /// Demanded functions for which every node was masked.
    pub infeasible: Vec<usize>,
}

/// Places each demanded function, in id order, on one node picked by
/// `choose(state, mask)`. The mask admits only the current function's row;
/// the state after each step shows the function's demand cleared and the
/// node's residual reduced.
pub fn place_functions<F>(demand: &[f64], nodes: &[NodeSpec], mut choose: F) -> Result<Placement>
where
    F: FnMut(&[f64], &[bool]) -> Result<usize>,
{
    let nn = nodes.len();
    let mut pending = demand.to_vec();
    let mut residual: Vec<f64> = nodes.iter().map(|n| n.processing_capacity).collect();
    let mut out = Placement::default();
    for f in 0..demand.len() {
        if demand[f] <= 0.0 {
            continue;
        }
        let full = pl_mask(&pending, &residual);
        let mask: Vec<bool> = full
            .iter()
            .enumerate()
            .map(|(i, &ok)| ok && i / nn == f)
            .collect();
        if !mask.iter().any(|&m| m) {
            out.infeasible.push(f);
            pending[f] = 0.0;
            continue;
        }
        let state = pl_state(&pending, &residual, nodes);
        let action = choose(&state, &mask)?;
        if !mask.get(action).copied().unwrap_or(false) {
            return Err(Error::Argument(format!("masked placement action {action}")));
        }
        let n = action % nn;
        residual[n] -= demand[f];
        pending[f] = 0.0;
        out.hosts.insert(f, n);
        out.steps.push(PlacementStep {
            state,
            action,
            next_state: pl_state(&pending, &residual, nodes),
        });
    }
    Ok(out)
}

/// Accepted requests minus weighted placement and link energy, with
/// `penalty` charged per failed request.
pub fn pl_reward(
    selected: usize,
    placement_energy: f64,
    link_energy: f64,
    failed: usize,
    alpha: f64,
    penalty: f64,
) -> f64 {
    selected as f64 - alpha * (placement_energy + link_energy) - penalty * failed as f64
}

/// Dueling double Q agent over (function, node) actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlAgent {
    pub learner: Learner,
    pub functions: usize,
    pub nodes: usize,
    /// Divides capacity-like entries before they reach the network.
    pub capacity_scale: f64,
    /// Divides deploy energies before they reach the network.
    pub energy_scale: f64,
}

impl PlAgent {
    pub fn new(nodes: &[NodeSpec], functions: usize, config: LearnerConfig, seed: u64) -> Result<Self> {
        if nodes.is_empty() || functions == 0 {
            return Err(Error::Argument("placement agent needs nodes and functions".into()));
        }
        let nn = nodes.len();
        let scale = |f: fn(&NodeSpec) -> f64| nodes.iter().map(f).fold(1.0, f64::max);
        Ok(PlAgent {
            learner: Learner::new(functions + 2 * nn, functions * nn, config, seed)?,
            functions,
            nodes: nn,
            capacity_scale: scale(|n| n.processing_capacity),
            energy_scale: scale(|n| n.deploy_energy),
        })
    }

    pub fn features(&self, state: &[f64]) -> Vec<f64> {
        PlAgent::scaler(self.functions, self.capacity_scale, self.energy_scale)(state)
    }

    pub fn place(&mut self, demand: &[f64], nodes: &[NodeSpec], explore: bool) -> Result<Placement> {
        let (cs, es, nf) = (self.capacity_scale, self.energy_scale, self.functions);
        let probe = PlAgent::scaler(nf, cs, es);
        let learner = &mut self.learner;
        place_functions(demand, nodes, |s, m| {
            let x = probe(s);
            if explore {
                learner.act(&x, Some(m))
            } else {
                learner.greedy(&x, Some(m))
            }
        })
    }

    fn scaler(functions: usize, cs: f64, es: f64) -> impl Fn(&[f64]) -> Vec<f64> {
        move |s: &[f64]| {
            s.iter()
                .enumerate()
                .map(|(i, v)| if i >= functions && (i - functions) % 2 == 1 { v / es } else { v / cs })
                .collect()
        }
    }

    /// Stores every step of a placement pass with the frame's reward.
    pub fn remember(&mut self, placement: &Placement, reward: f64) -> Result<()> {
        for step in &placement.steps {
            let t = Transition::new(
                self.features(&step.state),
                step.action,
                reward,
                self.features(&step.next_state),
            )?;
            self.learner.remember(t)?;
        }
        Ok(())
    }

    pub fn learn(&mut self) -> Result<Option<f64>> {
        self.learner.learn()
    }
}

/// One request to route in a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteRequest {
    pub request: usize,
    pub head: usize,
    pub tail: usize,
    /// Latency still available in the request's budget.
    pub latency_left: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteChoice {
    pub path: usize,
    pub energy: f64,
    pub latency: f64,
    pub hops: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteDiagnostic {
    pub request: usize,
    /// `None` when no feasible path existed.
    pub choice: Option<RouteChoice>,
    pub feasible: usize,
}

/// Paths that start and end at the request's attachment points, pass the
/// hosts of its chain in order, fit the residual link bandwidth and the
/// remaining latency budget.
pub fn feasible_routes(
    world: &World,
    req: &RouteRequest,
    hosts: &BTreeMap<usize, usize>,
    link_load: &[f64],
    link_latency: &[f64],
) -> Vec<RouteChoice> {
    let inst = &world.instance;
    let r = world.request(req.request);
    let chain = &inst.service_of(r).functions;
    let host_of = |f: usize| hosts.get(&f).map(|&n| vec![n]).unwrap_or_default();
    world
        .paths
        .between(req.head, req.tail)
        .filter(|p| p.visits_in_order(chain, host_of))
        .filter_map(|p| {
            let links = p.distinct_links();
            let fits = links
                .iter()
                .all(|&l| !exceeds(link_load[l] + r.bandwidth_req, inst.links[l].bandwidth_capacity));
            let latency: f64 = links.iter().map(|&l| link_latency[l]).sum();
            (fits && !exceeds(latency, req.latency_left)).then(|| RouteChoice {
                path: p.id,
                energy: links.iter().map(|&l| inst.links[l].transmit_energy).sum(),
                latency,
                hops: p.hops(),
            })
        })
        .collect()
}

/// Minimum-energy choice, ties by fewer hops, then lower path id.
pub fn cheapest(candidates: &[RouteChoice]) -> usize {
    (0..candidates.len())
        .min_by(|&a, &b| {
            let (x, y) = (&candidates[a], &candidates[b]);
            x.energy
                .total_cmp(&y.energy)
                .then(x.hops.cmp(&y.hops))
                .then(x.path.cmp(&y.path))
        })
        .unwrap_or(0)
}

/// Routes requests in ascending order of latency requirement (ties by id),
/// committing each route's bandwidth before the next request.
pub fn pl_route_with<P>(
    world: &World,
    requests: &[RouteRequest],
    hosts: &BTreeMap<usize, usize>,
    link_load: &mut [f64],
    link_latency: &[f64],
    mut pick: P,
) -> Vec<RouteDiagnostic>
where
    P: FnMut(&[RouteChoice]) -> usize,
{
    let mut order: Vec<&RouteRequest> = requests.iter().collect();
    order.sort_by(|a, b| {
        let (ra, rb) = (world.request(a.request), world.request(b.request));
        ra.latency_req.total_cmp(&rb.latency_req).then(a.request.cmp(&b.request))
    });
    let mut out = Vec::with_capacity(requests.len());
    for req in order {
        let candidates = feasible_routes(world, req, hosts, link_load, link_latency);
        let choice = (!candidates.is_empty()).then(|| candidates[pick(&candidates)]);
        if let Some(c) = choice {
            let bw = world.request(req.request).bandwidth_req;
            for l in world.paths.paths[c.path].distinct_links() {
                link_load[l] += bw;
            }
        }
        out.push(RouteDiagnostic {
            request: req.request,
            choice,
            feasible: candidates.len(),
        });
    }
    out
}

/// [`pl_route_with`] using the minimum-energy rule.
pub fn pl_route(
    world: &World,
    requests: &[RouteRequest],
    hosts: &BTreeMap<usize, usize>,
    link_load: &mut [f64],
    link_latency: &[f64],
) -> Vec<RouteDiagnostic> {
    pl_route_with(world, requests, hosts, link_load, link_latency, cheapest)
}
