use serde::{Deserialize, Serialize};

use crate::environment::{link_latency, relocation_energy, World};
use crate::error::{Error, Result};
use crate::model::Allocation;

/// Total energy split by source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub placement: f64,
    pub movement: f64,
    pub link: f64,
    pub channel: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.placement + self.movement + self.link + self.channel
    }
}

/// Rejects allocations whose indices fall outside the instance, or whose
/// request-scoped decisions lie outside the request's window.
pub fn validate_structure(alloc: &Allocation, world: &World) -> Result<()> {
    let inst = &world.instance;
    let frames = world.frames();
    let slots = world.slots();
    let nf = inst.function_count();
    let nn = inst.nodes.len();
    let nr = inst.requests.len();
    let err = |what: String| Err(Error::Structural(what));
    let window = |t: usize, r: usize| r < nr && inst.requests[r].is_active(t) && t < frames;
    for &(t, r, f) in &alloc.x_select {
        if !window(t, r) || f >= nf {
            return err(format!("selection (frame {t}, request {r}, function {f})"));
        }
    }
    for &(t, f, n) in &alloc.y_place {
        if t >= frames || f >= nf || n >= nn {
            return err(format!("placement (frame {t}, function {f}, node {n})"));
        }
    }
    for &(t, s, r, c) in &alloc.z_channel {
        if !window(t, r) || s >= slots || c >= inst.channels.len() {
            return err(format!("resource block (frame {t}, slot {s}, request {r}, channel {c})"));
        }
    }
    for &(t, n, a) in &alloc.s_area {
        if t >= frames || n >= nn || !inst.grid.contains(a) {
            return err(format!("position (frame {t}, node {n}, area {a})"));
        }
    }
    for &(t, u, n) in &alloc.b_poa {
        if t >= frames || u >= inst.ues.len() || n >= nn {
            return err(format!("attachment (frame {t}, ue {u}, node {n})"));
        }
    }
    for &(t, r, p) in &alloc.r_path {
        if !window(t, r) || p >= world.paths.len() {
            return err(format!("path (frame {t}, request {r}, path {p})"));
        }
    }
    Ok(())
}

/// UAV relocation energy summed over frames, starting from each UAV's
/// initial area before frame 0.
pub fn movement_energy(alloc: &Allocation, world: &World) -> Result<f64> {
    let inst = &world.instance;
    let mut total = 0.0;
    for node in inst.nodes.iter().filter(|n| n.is_uav()) {
        let mut prev = node.initial_area();
        for t in 0..world.frames() {
            if let Some(cur) = alloc.area_of(t, node.id) {
                if cur != prev {
                    total += relocation_energy(node, &inst.grid, prev, cur)?;
                }
                prev = cur;
            }
        }
    }
    Ok(total)
}

/// Energy of every term, after a structural check.
pub fn total_energy(alloc: &Allocation, world: &World) -> Result<EnergyBreakdown> {
    validate_structure(alloc, world)?;
    let inst = &world.instance;
    let placement = alloc
        .y_place
        .iter()
        .map(|&(_, _, n)| inst.nodes[n].deploy_energy)
        .sum();
    let link = alloc
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
    let channel = alloc
        .z_channel
        .iter()
        .map(|&(_, _, _, c)| inst.channels[c].use_energy)
        .sum();
    Ok(EnergyBreakdown {
        placement,
        movement: movement_energy(alloc, world)?,
        link,
        channel,
    })
}

/// Committed bandwidth per `[frame][link]`.
pub fn link_loads(alloc: &Allocation, world: &World) -> Vec<Vec<f64>> {
    let inst = &world.instance;
    let mut loads = vec![vec![0.0; inst.links.len()]; world.frames()];
    for &(t, r, p) in &alloc.r_path {
        let bw = inst.requests[r].bandwidth_req;
        for l in world.paths.paths[p].distinct_links() {
            loads[t][l] += bw;
        }
    }
    loads
}

/// Latency of every link in `frame`, driven by the previous frame's load.
pub fn frame_link_latencies(loads: &[Vec<f64>], world: &World, frame: usize) -> Vec<f64> {
    world
        .instance
        .links
        .iter()
        .map(|l| {
            let load = if frame == 0 {
                0.0
            } else {
                loads[frame - 1][l.id] / l.bandwidth_capacity
            };
            link_latency(l, load)
        })
        .collect()
}

/// End-to-end latency of `request`: link latencies of its chosen paths
/// summed over the window.
pub fn request_latency(alloc: &Allocation, world: &World, request: usize) -> f64 {
    let loads = link_loads(alloc, world);
    request_latency_with(alloc, world, &loads, request)
}

pub(crate) fn request_latency_with(
    alloc: &Allocation,
    world: &World,
    loads: &[Vec<f64>],
    request: usize,
) -> f64 {
    let r = world.request(request);
    let mut total = 0.0;
    for t in r.frames().filter(|t| *t < world.frames()) {
        let paths = alloc.paths_of(t, request);
        if paths.is_empty() {
            continue;
        }
        let lat = frame_link_latencies(loads, world, t);
        for p in paths {
            total += world.paths.paths[p]
                .distinct_links()
                .iter()
                .map(|&l| lat[l])
                .sum::<f64>();
        }
    }
    total
}

/// Acceptance indicator: every function selected in every window frame.
/// Requests whose window leaves the horizon are never accepted.
pub fn acceptance(alloc: &Allocation, world: &World, request: usize) -> bool {
    let r = world.request(request);
    if !world.fits_horizon(r) {
        return false;
    }
    let service = world.instance.service_of(r);
    r.frames()
        .all(|t| service.functions.iter().all(|&f| alloc.is_selected(t, request, f)))
}
