use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{AreaGrid, Heading};
use super::service::{ChannelPhys, ChannelSpec, Request, ServiceSpec, UeSpec};
use super::topology::{
    validate_topology, LinkSpec, NetworkTopology, NodeKind, NodeSpec, PathSet, UavParams,
    ValidationReport, VelocityProfile,
};
use crate::error::{Error, Result};
use crate::rng::{SeedBundle, SimRng, Stream};

pub const DEFAULT_MAX_HOPS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub total_frames: usize,
    pub slots_per_frame: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingConfig {
    pub max_hops: usize,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        RoutingConfig {
            max_hops: DEFAULT_MAX_HOPS,
        }
    }
}

/// A complete static problem description, as stored in an instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub time: TimeConfig,
    #[serde(default)]
    pub routing: RoutingConfig,
    #[serde(default)]
    pub seeds: SeedBundle,
    pub grid: AreaGrid,
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub links: Vec<LinkSpec>,
    pub services: Vec<ServiceSpec>,
    pub channels: Vec<ChannelSpec>,
    #[serde(default)]
    pub ues: Vec<UeSpec>,
    #[serde(default)]
    pub requests: Vec<Request>,
}

impl Instance {
    pub fn topology(&self) -> NetworkTopology {
        NetworkTopology {
            grid: self.grid.clone(),
            nodes: self.nodes.clone(),
            links: self.links.clone(),
        }
    }

    pub fn paths(&self) -> PathSet {
        PathSet::build(&self.topology(), self.routing.max_hops)
    }

    /// Number of distinct function ids, i.e. one past the largest id used.
    pub fn function_count(&self) -> usize {
        self.services
            .iter()
            .flat_map(|s| s.functions.iter())
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn uav_ids(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.is_uav()).map(|n| n.id).collect()
    }

    pub fn service_of(&self, request: &Request) -> &ServiceSpec {
        &self.services[request.service]
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: "<string>".into(),
            message: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }

    /// Topology checks plus services, channels, UEs and requests.
    pub fn validate(&self) -> ValidationReport {
        let mut report = validate_topology(&self.topology());
        if self.time.slots_per_frame == 0 {
            report.push("time", "slots_per_frame must be at least 1");
        }
        for (i, s) in self.services.iter().enumerate() {
            let entity = format!("service {}", s.id);
            if s.id != i {
                report.push(&entity, format!("id does not match position {i}"));
            }
            if s.functions.is_empty() {
                report.push(&entity, "service has no functions");
            }
            let mut seen = s.functions.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != s.functions.len() {
                report.push(&entity, "function repeated in chain");
            }
            if s.duration_frames == 0 {
                report.push(&entity, "duration must be at least one frame");
            }
        }
        for (i, c) in self.channels.iter().enumerate() {
            let entity = format!("channel {}", c.id);
            if c.id != i {
                report.push(&entity, format!("id does not match position {i}"));
            }
            if !(c.use_energy >= 0.0) {
                report.push(&entity, "use energy must be non-negative");
            }
            let p = &c.phys;
            if !(p.quality_threshold > 0.0) || !(p.subcarrier_spacing > 0.0) {
                report.push(&entity, "threshold and subcarrier spacing must be positive");
            }
            if !(p.rayleigh_scale > 0.0) || !(p.intra_area_distance > 0.0) {
                report.push(&entity, "fading scale and distance must be positive");
            }
        }
        for (i, u) in self.ues.iter().enumerate() {
            let entity = format!("ue {}", u.ue);
            if u.ue != i {
                report.push(&entity, format!("id does not match position {i}"));
            }
            if !self.grid.contains(u.area) {
                report.push(&entity, format!("area {} outside grid", u.area));
            }
        }
        for (i, r) in self.requests.iter().enumerate() {
            let entity = format!("request {}", r.id);
            if r.id != i {
                report.push(&entity, format!("id does not match position {i}"));
            }
            self.validate_request(r, &entity, &mut report);
        }
        report
    }

    fn validate_request(&self, r: &Request, entity: &str, report: &mut ValidationReport) {
        if r.ue >= self.ues.len() {
            report.push(entity, "unknown UE");
        }
        let Some(service) = self.services.get(r.service) else {
            report.push(entity, "unknown service");
            return;
        };
        if r.active_window.0 != r.entry_frame
            || r.active_window.1 < r.active_window.0
            || r.duration() != service.duration_frames
        {
            report.push(entity, "active window does not match the service duration");
        }
        if r.capacity_req.len() != service.functions.len() {
            report.push(entity, "capacity requirements not aligned with service functions");
        }
        if r.required_slots == 0 || r.required_slots > self.time.slots_per_frame {
            report.push(entity, "required slots outside [1, slots_per_frame]");
        }
        let positive = r.bandwidth_req > 0.0
            && r.latency_req > 0.0
            && r.capacity_req.iter().all(|c| *c > 0.0);
        if !positive {
            report.push(entity, "requirement values must be positive");
        }
    }
}

/// Inclusive sampling range.
pub type Range = (f64, f64);

fn draw(rng: &mut SimRng, (lo, hi): Range) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn draw_int(rng: &mut SimRng, (lo, hi): (usize, usize)) -> usize {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Sampling ranges for request requirements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestRanges {
    pub bandwidth: Range,
    pub capacity: Range,
    pub latency: Range,
    pub slots: (usize, usize),
}

impl Default for RequestRanges {
    fn default() -> Self {
        RequestRanges {
            bandwidth: (2.0, 8.0),
            capacity: (8.0, 20.0),
            latency: (50.0, 100.0),
            slots: (3, 9),
        }
    }
}

impl RequestRanges {
    /// Draws one request for `ue` and `service` entering at `frame`.
    pub fn sample(
        &self,
        rng: &mut SimRng,
        id: usize,
        ue: usize,
        service: &ServiceSpec,
        frame: usize,
        slots_per_frame: usize,
    ) -> Request {
        let bandwidth_req = draw(rng, self.bandwidth);
        let capacity_req = service
            .functions
            .iter()
            .map(|_| draw(rng, self.capacity))
            .collect();
        let latency_req = draw(rng, self.latency);
        let hi = self.slots.1.min(slots_per_frame).max(1);
        let lo = self.slots.0.clamp(1, hi);
        let required_slots = draw_int(rng, (lo, hi));
        Request {
            id,
            ue,
            service: service.id,
            entry_frame: frame,
            active_window: (frame, frame + service.duration_frames),
            bandwidth_req,
            capacity_req,
            latency_req,
            required_slots,
        }
    }
}

/// Parameters of a randomly generated instance. Ranges follow the reference
/// simulation settings; counts and durations default to desk scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub rows: usize,
    pub cols: usize,
    pub los_range: Range,
    pub core_nodes: usize,
    pub rsus: usize,
    pub uavs: usize,
    pub processing_capacity: Range,
    pub deploy_energy: Range,
    pub link_bandwidth: Range,
    pub link_latency: Range,
    pub link_energy: Range,
    pub uav_weight: Range,
    pub uav_velocity: Range,
    pub services: usize,
    pub functions: usize,
    pub functions_per_service: (usize, usize),
    pub service_duration: (usize, usize),
    pub ues: usize,
    pub channels: usize,
    pub channel_energy: Range,
    pub rayleigh_scale: Range,
    pub slots_per_frame: usize,
    pub total_frames: usize,
    pub max_hops: usize,
    /// Requests listed in the instance itself, with windows inside the horizon.
    pub scripted_requests: usize,
    pub request_ranges: RequestRanges,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            rows: 4,
            cols: 4,
            los_range: (0.2, 0.8),
            core_nodes: 1,
            rsus: 3,
            uavs: 2,
            processing_capacity: (25.0, 70.0),
            deploy_energy: (12.0, 36.0),
            link_bandwidth: (10.0, 30.0),
            link_latency: (4.0, 16.0),
            link_energy: (5.0, 8.0),
            uav_weight: (4.0, 6.0),
            uav_velocity: (8.0, 12.0),
            services: 4,
            functions: 6,
            functions_per_service: (1, 3),
            service_duration: (1, 3),
            ues: 10,
            channels: 4,
            channel_energy: (2.0, 8.0),
            rayleigh_scale: (0.2, 0.8),
            slots_per_frame: 10,
            total_frames: 200,
            max_hops: DEFAULT_MAX_HOPS,
            scripted_requests: 0,
            request_ranges: RequestRanges::default(),
        }
    }
}

impl GeneratorConfig {
    /// Splits `total` nodes into one core node and alternating UAV/RSU
    /// additions, UAV first.
    pub fn with_node_count(mut self, total: usize) -> Self {
        let edge = total.saturating_sub(1);
        self.core_nodes = total.min(1);
        self.uavs = edge.div_ceil(2);
        self.rsus = edge - self.uavs;
        self
    }

    /// A two-area, three-node, two-frame preset small enough for the
    /// exhaustive solvers.
    pub fn micro() -> Self {
        GeneratorConfig {
            rows: 1,
            cols: 2,
            rsus: 1,
            uavs: 1,
            services: 2,
            functions: 3,
            functions_per_service: (1, 2),
            service_duration: (1, 2),
            ues: 2,
            channels: 2,
            slots_per_frame: 2,
            total_frames: 2,
            max_hops: 2,
            scripted_requests: 2,
            request_ranges: RequestRanges {
                slots: (1, 2),
                ..RequestRanges::default()
            },
            ..GeneratorConfig::default()
        }
    }

    /// Five areas in a row served by one RSU and two UAVs; small enough to
    /// train in a single 200-frame episode.
    pub fn toy() -> Self {
        GeneratorConfig {
            rows: 1,
            cols: 5,
            rsus: 1,
            uavs: 2,
            services: 2,
            functions: 3,
            functions_per_service: (1, 2),
            service_duration: (1, 2),
            ues: 4,
            max_hops: 3,
            request_ranges: RequestRanges {
                slots: (1, 4),
                ..RequestRanges::default()
            },
            ..GeneratorConfig::default()
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Instance> {
        let seeds = SeedBundle::new(seed);
        let grid = AreaGrid::build(self.rows, self.cols, self.los_range, seed)?;
        let nodes = self.generate_nodes(&seeds, &grid);
        let links = self.generate_links(&seeds, &nodes);
        let services = self.generate_services(&seeds)?;
        let channels = self.generate_channels(&seeds);
        let ues = self.generate_ues(&seeds, &grid);
        let mut instance = Instance {
            time: TimeConfig {
                total_frames: self.total_frames,
                slots_per_frame: self.slots_per_frame,
            },
            routing: RoutingConfig {
                max_hops: self.max_hops,
            },
            seeds,
            grid,
            nodes,
            links,
            services,
            channels,
            ues,
            requests: Vec::new(),
        };
        instance.requests = self.generate_requests(&instance);
        Ok(instance)
    }

    fn generate_nodes(&self, seeds: &SeedBundle, grid: &AreaGrid) -> Vec<NodeSpec> {
        let mut rng = seeds.stream(Stream::Nodes);
        let mut areas: Vec<usize> = grid.area_ids().collect();
        areas.shuffle(&mut rng);
        let mut fixed = areas.into_iter().cycle();
        let kinds = std::iter::repeat_n(NodeKind::Core, self.core_nodes)
            .chain(std::iter::repeat_n(NodeKind::Rsu, self.rsus))
            .chain(std::iter::repeat_n(NodeKind::Uav, self.uavs));
        kinds
            .enumerate()
            .map(|(id, kind)| {
                let processing_capacity = draw(&mut rng, self.processing_capacity);
                let deploy_energy = draw(&mut rng, self.deploy_energy);
                if kind == NodeKind::Uav {
                    let weight = draw(&mut rng, self.uav_weight);
                    let v = draw(&mut rng, self.uav_velocity);
                    NodeSpec {
                        id,
                        kind,
                        processing_capacity,
                        deploy_energy,
                        fixed_area: None,
                        start_area: Some(rng.random_range(0..grid.len())),
                        uav_params: Some(UavParams {
                            weight,
                            induced_power: 0.08,
                            air_density: 1.225,
                            rotor_disk_area: 0.6,
                            drag_coeff: 0.05,
                            frontal_area: 0.25,
                            velocity_profile: VelocityProfile::Constant(v),
                        }),
                    }
                } else {
                    NodeSpec {
                        id,
                        kind,
                        processing_capacity,
                        deploy_energy,
                        fixed_area: fixed.next(),
                        start_area: None,
                        uav_params: None,
                    }
                }
            })
            .collect()
    }

    /// Cores form a chain; every RSU connects to the first core and to the
    /// next RSU; every UAV connects to the first core and to one RSU.
    fn generate_links(&self, seeds: &SeedBundle, nodes: &[NodeSpec]) -> Vec<LinkSpec> {
        let mut rng = seeds.stream(Stream::Links);
        let ids = |k: NodeKind| -> Vec<usize> {
            nodes.iter().filter(|n| n.kind == k).map(|n| n.id).collect()
        };
        let (cores, rsus, uavs) = (ids(NodeKind::Core), ids(NodeKind::Rsu), ids(NodeKind::Uav));
        let mut pairs = Vec::new();
        pairs.extend(cores.windows(2).map(|w| (w[0], w[1])));
        if let Some(&core) = cores.first() {
            pairs.extend(rsus.iter().map(|&r| (core, r)));
        }
        pairs.extend(rsus.windows(2).map(|w| (w[0], w[1])));
        for (i, &u) in uavs.iter().enumerate() {
            if let Some(&core) = cores.first() {
                pairs.push((core, u));
            }
            if !rsus.is_empty() {
                pairs.push((rsus[i % rsus.len()], u));
            }
        }
        if cores.is_empty() {
            pairs.extend(uavs.windows(2).map(|w| (w[0], w[1])));
        }
        pairs
            .into_iter()
            .enumerate()
            .map(|(id, endpoints)| LinkSpec {
                id,
                endpoints,
                bandwidth_capacity: draw(&mut rng, self.link_bandwidth),
                transmit_energy: draw(&mut rng, self.link_energy),
                base_latency: draw(&mut rng, self.link_latency),
            })
            .collect()
    }

    fn generate_services(&self, seeds: &SeedBundle) -> Result<Vec<ServiceSpec>> {
        if self.functions == 0 && self.services > 0 {
            return Err(Error::Config("services need at least one function".into()));
        }
        let mut rng = seeds.stream(Stream::Services);
        let pool: Vec<usize> = (0..self.functions).collect();
        Ok((0..self.services)
            .map(|id| {
                let k = draw_int(&mut rng, self.functions_per_service).clamp(1, self.functions);
                let functions = pool.choose_multiple(&mut rng, k).copied().collect();
                ServiceSpec {
                    id,
                    functions,
                    duration_frames: draw_int(&mut rng, self.service_duration).max(1),
                }
            })
            .collect())
    }

    fn generate_channels(&self, seeds: &SeedBundle) -> Vec<ChannelSpec> {
        let mut rng = seeds.stream(Stream::Channels);
        (0..self.channels)
            .map(|id| ChannelSpec {
                id,
                use_energy: draw(&mut rng, self.channel_energy),
                phys: ChannelPhys {
                    rayleigh_scale: draw(&mut rng, self.rayleigh_scale),
                    ..ChannelPhys::default()
                },
            })
            .collect()
    }

    fn generate_ues(&self, seeds: &SeedBundle, grid: &AreaGrid) -> Vec<UeSpec> {
        let mut rng = seeds.stream(Stream::Ues);
        (0..self.ues)
            .map(|ue| UeSpec {
                ue,
                area: rng.random_range(0..grid.len()),
                heading: Heading::ALL[rng.random_range(0..4)],
            })
            .collect()
    }

    fn generate_requests(&self, instance: &Instance) -> Vec<Request> {
        let mut rng = instance.seeds.stream(Stream::Requests);
        let mut out = Vec::new();
        if instance.services.is_empty() || instance.ues.is_empty() {
            return out;
        }
        for id in 0..self.scripted_requests {
            let service = &instance.services[rng.random_range(0..instance.services.len())];
            let latest = self.total_frames.saturating_sub(service.duration_frames);
            let frame = rng.random_range(0..=latest);
            let ue = rng.random_range(0..instance.ues.len());
            out.push(self.request_ranges.sample(
                &mut rng,
                id,
                ue,
                service,
                frame,
                self.slots_per_frame,
            ));
        }
        out
    }
}
