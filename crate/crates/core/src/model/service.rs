use serde::{Deserialize, Serialize};

use super::grid::Heading;

/// A composed service: an ordered chain of atomic functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServiceSpec {
    pub id: usize,
    /// Functions in execution order. The data graph is this chain.
    pub functions: Vec<usize>,
    pub duration_frames: usize,
}

impl ServiceSpec {
    /// Position of `function` within the chain.
    pub fn position(&self, function: usize) -> Option<usize> {
        self.functions.iter().position(|f| *f == function)
    }

    /// Edges of the data graph, `(from, to)` in chain order.
    pub fn data_graph(&self) -> Vec<(usize, usize)> {
        self.functions.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// A UE's demand for a composed service over a window of frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: usize,
    pub ue: usize,
    pub service: usize,
    pub entry_frame: usize,
    /// Half-open frame interval `[entry, entry + duration)`.
    pub active_window: (usize, usize),
    pub bandwidth_req: f64,
    /// Capacity demanded by each function, aligned with the service chain.
    pub capacity_req: Vec<f64>,
    /// End-to-end latency budget, ms.
    pub latency_req: f64,
    pub required_slots: usize,
}

impl Request {
    pub fn duration(&self) -> usize {
        self.active_window.1 - self.active_window.0
    }

    pub fn is_active(&self, frame: usize) -> bool {
        (self.active_window.0..self.active_window.1).contains(&frame)
    }

    pub fn frames(&self) -> std::ops::Range<usize> {
        self.active_window.0..self.active_window.1
    }

    /// Last frame of the window.
    pub fn last_frame(&self) -> usize {
        self.active_window.1 - 1
    }

    /// Capacity demanded for `function`, or 0 if the service does not use it.
    pub fn capacity_for(&self, service: &ServiceSpec, function: usize) -> f64 {
        service
            .position(function)
            .and_then(|i| self.capacity_req.get(i).copied())
            .unwrap_or(0.0)
    }
}

/// Radio parameters of an uplink channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPhys {
    /// W.
    pub transmit_power: f64,
    /// W/Hz.
    pub noise_density: f64,
    /// Hz.
    pub subcarrier_spacing: f64,
    pub path_loss_exponent: f64,
    /// m.
    pub reference_distance: f64,
    pub quality_threshold: f64,
    /// Scale of the Rayleigh small-scale fading amplitude.
    pub rayleigh_scale: f64,
    /// Transmitter-receiver separation when UE and PoA share an area, m.
    pub intra_area_distance: f64,
}

impl Default for ChannelPhys {
    fn default() -> Self {
        ChannelPhys {
            transmit_power: 0.2,
            noise_density: 3.98e-21,
            subcarrier_spacing: 15e3,
            path_loss_exponent: 4.8,
            reference_distance: 1.0,
            quality_threshold: 1.0,
            rayleigh_scale: 0.5,
            intra_area_distance: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub id: usize,
    /// Energy per allocated slot.
    pub use_energy: f64,
    pub phys: ChannelPhys,
}

/// Initial placement of a vehicular UE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UeSpec {
    pub ue: usize,
    pub area: usize,
    pub heading: Heading,
}
