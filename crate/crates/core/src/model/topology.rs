use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::AreaGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Core,
    Rsu,
    Uav,
}

impl NodeKind {
    /// Radio-capable nodes can act as a point of attachment for UEs.
    pub fn is_radio(self) -> bool {
        matches!(self, NodeKind::Rsu | NodeKind::Uav)
    }
}

/// Velocity of a UAV during a relocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VelocityProfile {
    /// Constant cruise speed in m/s.
    Constant(f64),
    /// Speed samples `(t, v)` in (s, m/s), linearly interpolated and held
    /// constant after the last sample.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl VelocityProfile {
    pub fn speed_at(&self, t: f64) -> f64 {
        match self {
            VelocityProfile::Constant(v) => *v,
            VelocityProfile::PiecewiseLinear(pts) => {
                if pts.is_empty() {
                    return 0.0;
                }
                if t <= pts[0].0 {
                    return pts[0].1;
                }
                for w in pts.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if t <= t1 {
                        if t1 == t0 {
                            return v1;
                        }
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                pts[pts.len() - 1].1
            }
        }
    }

    /// Speed used to convert distances into travel times.
    pub fn cruise_speed(&self) -> f64 {
        match self {
            VelocityProfile::Constant(v) => *v,
            VelocityProfile::PiecewiseLinear(pts) => {
                pts.iter().map(|p| p.1).fold(0.0, f64::max)
            }
        }
    }
}

/// Aerodynamic parameters of a UAV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavParams {
    /// Total weight, kg.
    pub weight: f64,
    /// Induced power coefficient.
    pub induced_power: f64,
    /// Air density, kg/m^3.
    pub air_density: f64,
    /// Rotor disk area, m^2.
    pub rotor_disk_area: f64,
    pub drag_coeff: f64,
    /// Frontal area, m^2.
    pub frontal_area: f64,
    pub velocity_profile: VelocityProfile,
}

impl UavParams {
    /// Hovering power `I * W^(3/2) / sqrt(2 * rho * A_r)`.
    pub fn hover_power(&self) -> f64 {
        self.induced_power * self.weight.powf(1.5)
            / (2.0 * self.air_density * self.rotor_disk_area).sqrt()
    }

    /// Coefficient `k` of the drag power `k * V^3`.
    pub fn drag_coefficient_term(&self) -> f64 {
        0.5 * self.drag_coeff * self.air_density * self.frontal_area
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: usize,
    pub kind: NodeKind,
    pub processing_capacity: f64,
    pub deploy_energy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_area: Option<usize>,
    /// Area a UAV occupies before the first frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_area: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uav_params: Option<UavParams>,
}

impl NodeSpec {
    pub fn is_uav(&self) -> bool {
        self.kind == NodeKind::Uav
    }

    /// Position before frame 0: the fixed area, or the UAV start area.
    pub fn initial_area(&self) -> usize {
        self.fixed_area.or(self.start_area).unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub id: usize,
    pub endpoints: (usize, usize),
    pub bandwidth_capacity: f64,
    /// Energy per request-frame carried over this link.
    pub transmit_energy: f64,
    /// Idle latency, ms.
    pub base_latency: f64,
}

impl LinkSpec {
    pub fn other(&self, node: usize) -> Option<usize> {
        match self.endpoints {
            (a, b) if a == node => Some(b),
            (a, b) if b == node => Some(a),
            _ => None,
        }
    }
}

/// A directed route through the network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSpec {
    pub id: usize,
    pub node_sequence: Vec<usize>,
    pub link_sequence: Vec<usize>,
}

impl PathSpec {
    pub fn head(&self) -> usize {
        self.node_sequence[0]
    }

    pub fn tail(&self) -> usize {
        self.node_sequence[self.node_sequence.len() - 1]
    }

    pub fn hops(&self) -> usize {
        self.link_sequence.len()
    }

    /// Link membership indicator `J_{p,l}`.
    pub fn includes_link(&self, link: usize) -> bool {
        self.link_sequence.contains(&link)
    }

    /// Distinct links on the path, ascending.
    pub fn distinct_links(&self) -> BTreeSet<usize> {
        self.link_sequence.iter().copied().collect()
    }

    /// Whether the path passes through nodes hosting each function of
    /// `chain`, in chain order. `hosts(f)` lists the nodes hosting `f`.
    pub fn visits_in_order<F>(&self, chain: &[usize], hosts: F) -> bool
    where
        F: Fn(usize) -> Vec<usize>,
    {
        let mut pos = 0;
        for &f in chain {
            let candidates = hosts(f);
            match self.node_sequence[pos..]
                .iter()
                .position(|n| candidates.contains(n))
            {
                Some(off) => pos += off,
                None => return false,
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkTopology {
    pub grid: AreaGrid,
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
}

impl NetworkTopology {
    pub fn uav_ids(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.is_uav()).map(|n| n.id).collect()
    }

    /// Links incident to `node`, ordered by (neighbor, link id).
    pub fn incident(&self, node: usize) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .links
            .iter()
            .filter_map(|l| l.other(node).map(|o| (o, l.id)))
            .collect();
        v.sort_unstable();
        v
    }
}

/// Enumerates every directed simple path with between 1 and `max_hops`
/// links. With `max_hops == 0` the single-node paths are returned instead.
/// Paths are numbered in discovery order starting at zero.
pub fn enumerate_paths(topology: &NetworkTopology, max_hops: usize) -> Vec<PathSpec> {
    let mut out = Vec::new();
    if max_hops == 0 {
        for n in &topology.nodes {
            push_path(&mut out, vec![n.id], vec![]);
        }
        return out;
    }
    for start in &topology.nodes {
        let mut nodes = vec![start.id];
        let mut links = Vec::new();
        extend_simple(topology, max_hops, &mut nodes, &mut links, &mut out);
    }
    out
}

fn extend_simple(
    topology: &NetworkTopology,
    max_hops: usize,
    nodes: &mut Vec<usize>,
    links: &mut Vec<usize>,
    out: &mut Vec<PathSpec>,
) {
    if links.len() == max_hops {
        return;
    }
    let last = *nodes.last().unwrap();
    for (next, link) in topology.incident(last) {
        if nodes.contains(&next) {
            continue;
        }
        nodes.push(next);
        links.push(link);
        push_path(out, nodes.clone(), links.clone());
        extend_simple(topology, max_hops, nodes, links, out);
        nodes.pop();
        links.pop();
    }
}

/// Closed routes `h -> v1 -> ... -> vk -> h` with distinct intermediate
/// nodes and at most `max_hops` links. An out-and-back over a single link
/// is included; it carries the link twice in its sequence.
pub fn enumerate_round_trips(topology: &NetworkTopology, max_hops: usize) -> Vec<PathSpec> {
    let mut out = Vec::new();
    if max_hops < 2 {
        return out;
    }
    for start in &topology.nodes {
        let mut nodes = vec![start.id];
        let mut links = Vec::new();
        extend_round_trip(topology, start.id, max_hops, &mut nodes, &mut links, &mut out);
    }
    out
}

fn extend_round_trip(
    topology: &NetworkTopology,
    head: usize,
    max_hops: usize,
    nodes: &mut Vec<usize>,
    links: &mut Vec<usize>,
    out: &mut Vec<PathSpec>,
) {
    let last = *nodes.last().unwrap();
    if !links.is_empty() && links.len() < max_hops {
        for (next, link) in topology.incident(last) {
            if next == head {
                let mut ns = nodes.clone();
                ns.push(head);
                let mut ls = links.clone();
                ls.push(link);
                push_path(out, ns, ls);
            }
        }
    }
    if links.len() + 2 > max_hops {
        return;
    }
    for (next, link) in topology.incident(last) {
        if nodes.contains(&next) {
            continue;
        }
        nodes.push(next);
        links.push(link);
        extend_round_trip(topology, head, max_hops, nodes, links, out);
        nodes.pop();
        links.pop();
    }
}

fn push_path(out: &mut Vec<PathSpec>, node_sequence: Vec<usize>, link_sequence: Vec<usize>) {
    let id = out.len();
    out.push(PathSpec {
        id,
        node_sequence,
        link_sequence,
    });
}

/// The route catalog used for routing: single-node paths, simple paths and
/// round trips, renumbered consecutively in that order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub max_hops: usize,
    pub paths: Vec<PathSpec>,
}

impl PathSet {
    pub fn build(topology: &NetworkTopology, max_hops: usize) -> Self {
        let mut all = enumerate_paths(topology, 0);
        if max_hops > 0 {
            all.extend(enumerate_paths(topology, max_hops));
            all.extend(enumerate_round_trips(topology, max_hops));
        }
        for (i, p) in all.iter_mut().enumerate() {
            p.id = i;
        }
        PathSet {
            max_hops,
            paths: all,
        }
    }

    pub fn get(&self, id: usize) -> Option<&PathSpec> {
        self.paths.get(id)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn between(&self, head: usize, tail: usize) -> impl Iterator<Item = &PathSpec> {
        self.paths
            .iter()
            .filter(move |p| p.head() == head && p.tail() == tail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Offending entity, e.g. `node 3`.
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, entity: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            entity: entity.into(),
            message: message.into(),
        });
    }
}

pub fn validate_topology(topology: &NetworkTopology) -> ValidationReport {
    let mut report = ValidationReport::default();
    let grid = &topology.grid;
    if grid.rows * grid.cols != grid.los_probability.len() || grid.is_empty() {
        report.push("grid", "rows*cols does not match the area list");
    }
    for (a, p) in grid.los_probability.iter().enumerate() {
        if !(0.0..=1.0).contains(p) {
            report.push(format!("area {a}"), format!("LoS probability {p} outside [0, 1]"));
        }
    }
    for (i, n) in topology.nodes.iter().enumerate() {
        let entity = format!("node {}", n.id);
        if n.id != i {
            report.push(&entity, format!("id does not match position {i}"));
        }
        if !(n.processing_capacity > 0.0) {
            report.push(&entity, "processing capacity must be positive");
        }
        if !(n.deploy_energy >= 0.0) {
            report.push(&entity, "deploy energy must be non-negative");
        }
        match (n.kind, &n.uav_params) {
            (NodeKind::Uav, None) => report.push(&entity, "missing aerodynamic parameters"),
            (NodeKind::Uav, Some(p)) => {
                let positive = [
                    p.weight,
                    p.air_density,
                    p.rotor_disk_area,
                    p.frontal_area,
                ];
                if positive.iter().any(|v| !(*v > 0.0))
                    || p.induced_power < 0.0
                    || p.drag_coeff < 0.0
                {
                    report.push(&entity, "aerodynamic parameters out of range");
                }
                if !(p.velocity_profile.cruise_speed() > 0.0) {
                    report.push(&entity, "UAV velocity must be positive");
                }
                if let Some(a) = n.start_area {
                    if !grid.contains(a) {
                        report.push(&entity, format!("start area {a} outside grid"));
                    }
                }
            }
            (_, Some(_)) => report.push(&entity, "aerodynamic parameters on a non-UAV node"),
            (_, None) => {}
        }
        if n.kind != NodeKind::Uav {
            match n.fixed_area {
                None => report.push(&entity, "fixed node without a fixed area"),
                Some(a) if !grid.contains(a) => {
                    report.push(&entity, format!("fixed area {a} outside grid"))
                }
                _ => {}
            }
        }
    }
    for (i, l) in topology.links.iter().enumerate() {
        let entity = format!("link {}", l.id);
        if l.id != i {
            report.push(&entity, format!("id does not match position {i}"));
        }
        let (a, b) = l.endpoints;
        if a == b {
            report.push(&entity, "endpoints must be distinct");
        }
        if a >= topology.nodes.len() || b >= topology.nodes.len() {
            report.push(&entity, "endpoint refers to an unknown node");
        }
        if !(l.bandwidth_capacity > 0.0) {
            report.push(&entity, "bandwidth capacity must be positive");
        }
        if !(l.base_latency > 0.0) {
            report.push(&entity, "base latency must be positive");
        }
        if !(l.transmit_energy >= 0.0) {
            report.push(&entity, "transmit energy must be non-negative");
        }
    }
    report
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn uav_params() -> UavParams {
        UavParams {
            weight: 5.0,
            induced_power: 0.08,
            air_density: 1.225,
            rotor_disk_area: 0.6,
            drag_coeff: 0.05,
            frontal_area: 0.25,
            velocity_profile: VelocityProfile::Constant(10.0),
        }
    }

    fn node(id: usize, kind: NodeKind) -> NodeSpec {
        NodeSpec {
            id,
            kind,
            processing_capacity: 50.0,
            deploy_energy: 20.0,
            fixed_area: (kind != NodeKind::Uav).then_some(0),
            start_area: (kind == NodeKind::Uav).then_some(0),
            uav_params: (kind == NodeKind::Uav).then(uav_params),
        }
    }

    fn link(id: usize, a: usize, b: usize) -> LinkSpec {
        LinkSpec {
            id,
            endpoints: (a, b),
            bandwidth_capacity: 20.0,
            transmit_energy: 6.0,
            base_latency: 8.0,
        }
    }

    pub(crate) fn topo(n: usize, links: &[(usize, usize)]) -> NetworkTopology {
        NetworkTopology {
            grid: AreaGrid::new(1, 1, vec![0.5]).unwrap(),
            nodes: (0..n).map(|i| node(i, NodeKind::Rsu)).collect(),
            links: links
                .iter()
                .enumerate()
                .map(|(i, (a, b))| link(i, *a, *b))
                .collect(),
        }
    }

    #[test]
    fn two_node_paths() {
        let t = topo(2, &[(0, 1)]);
        let paths = enumerate_paths(&t, 1);
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].node_sequence, vec![0, 1]);
        assert_eq!(paths[1].node_sequence, vec![1, 0]);
    }

    #[test]
    fn triangle_has_twelve_directed_paths() {
        let t = topo(3, &[(0, 1), (1, 2), (0, 2)]);
        let paths = enumerate_paths(&t, 2);
        // 6 single-hop, 6 two-hop: every ordered pair plus every ordered triple.
        assert_eq!(paths.len(), 12);
        assert_eq!(paths.iter().filter(|p| p.hops() == 2).count(), 6);
    }

    #[test]
    fn zero_hops_gives_single_node_paths() {
        let t = topo(3, &[(0, 1), (1, 2)]);
        let paths = enumerate_paths(&t, 0);
        assert_eq!(paths.len(), 3);
        assert!(paths.iter().all(|p| p.head() == p.tail() && p.hops() == 0));
    }

    #[test]
    fn disconnected_pair_has_no_path() {
        let t = topo(3, &[(0, 1)]);
        let paths = enumerate_paths(&t, 4);
        assert!(paths.iter().all(|p| !p.node_sequence.contains(&2)));
    }

    #[test]
    fn path_invariants_hold() {
        let t = topo(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        for p in enumerate_paths(&t, 3) {
            assert_eq!(p.node_sequence.len(), p.hops() + 1);
            for (i, l) in p.link_sequence.iter().enumerate() {
                let spec = &t.links[*l];
                let pair = (p.node_sequence[i], p.node_sequence[i + 1]);
                assert!(spec.endpoints == pair || spec.endpoints == (pair.1, pair.0));
            }
            let j_sum = t.links.iter().filter(|l| p.includes_link(l.id)).count();
            assert_eq!(j_sum, p.hops());
        }
    }

    #[test]
    fn round_trips_return_to_head() {
        let t = topo(3, &[(0, 1), (1, 2)]);
        let trips = enumerate_round_trips(&t, 4);
        assert!(trips.iter().all(|p| p.head() == p.tail() && p.hops() >= 2));
        assert!(trips.iter().any(|p| p.node_sequence == vec![0, 1, 0]));
        assert!(trips.iter().any(|p| p.node_sequence == vec![0, 1, 2, 1, 0]) == false);
        let set = PathSet::build(&t, 4);
        assert!(set.paths.iter().enumerate().all(|(i, p)| p.id == i));
        assert_eq!(set.between(0, 0).count(), 2);
    }

    #[test]
    fn visit_order_is_respected() {
        let p = PathSpec {
            id: 0,
            node_sequence: vec![0, 1, 2],
            link_sequence: vec![0, 1],
        };
        let hosts = |f: usize| match f {
            10 => vec![1],
            11 => vec![2],
            _ => vec![],
        };
        assert!(p.visits_in_order(&[10, 11], hosts));
        assert!(!p.visits_in_order(&[11, 10], hosts));
        assert!(p.visits_in_order(&[10, 10], hosts));
    }

    #[test]
    fn missing_uav_params_flagged() {
        let mut t = topo(2, &[(0, 1)]);
        t.nodes[1].kind = NodeKind::Uav;
        t.nodes[1].fixed_area = None;
        let report = validate_topology(&t);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].entity, "node 1");
        assert!(report.violations[0].message.contains("missing aerodynamic parameters"));
    }

    #[test]
    fn rsu_outside_grid_flagged() {
        let mut t = topo(2, &[(0, 1)]);
        t.nodes[0].fixed_area = Some(5);
        let report = validate_topology(&t);
        assert!(!report.is_ok());
        assert!(report.violations[0].message.contains("outside grid"));
    }
}
