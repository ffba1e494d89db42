//! Static domain types: areas, network topology, services, requests,
//! channels, the decision state and the instance file.

mod allocation;
mod grid;
mod instance;
mod service;
mod timebase;
mod topology;

pub use allocation::Allocation;
pub use grid::{AreaGrid, Heading, CELL_SIZE_M};
pub use instance::{
    GeneratorConfig, Instance, Range, RequestRanges, RoutingConfig, TimeConfig, DEFAULT_MAX_HOPS,
};
pub use service::{ChannelPhys, ChannelSpec, Request, ServiceSpec, UeSpec};
pub use timebase::TimeBase;
pub use topology::{
    enumerate_paths, enumerate_round_trips, validate_topology, LinkSpec, NetworkTopology,
    NodeKind, NodeSpec, PathSet, PathSpec, UavParams, ValidationReport, VelocityProfile,
    Violation,
};

/// Convenience alias for [`AreaGrid::build`].
pub fn build_grid(
    rows: usize,
    cols: usize,
    los_range: (f64, f64),
    rng_seed: u64,
) -> crate::error::Result<AreaGrid> {
    AreaGrid::build(rows, cols, los_range, rng_seed)
}
