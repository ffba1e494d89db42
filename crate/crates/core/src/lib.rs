//! Simulation and orchestration of UAV-assisted vehicular edge-cloud
//! networks.
//!
//! The crate is layered bottom-up:
//!
//! * [`model`]: static network, service and request descriptions.
//! * [`environment`]: mobility, arrivals, channel and latency realizations,
//!   UAV flight energy.
//! * [`allocate`]: the energy/acceptance objective, the constraint checker
//!   and an exhaustive solver for micro instances.
//! * [`mac`]: channel-quality beliefs and resource-block scheduling.
//! * [`learning`]: dueling double Q-learning building blocks.
//! * [`agents`]: trajectory planning, placement/routing and prediction.
//! * [`orchestrator`]: the per-frame decision pipeline and episodes.
//! * [`harness`]: scenario sweeps, metrics and plots.

pub mod agents;
pub mod allocate;
pub mod environment;
pub mod error;
pub mod harness;
pub mod learning;
pub mod mac;
pub mod orchestrator;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
