use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::environment::World;
use crate::error::{Error, Result};
use crate::learning::{Learner, LearnerConfig, Transition};

/// History window ℋ of the trajectory state.
pub const DEFAULT_HISTORY: usize = 4;

/// What the trajectory agent sees of one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpFrame {
    /// Σ over active requests of their total function capacity, per UE area.
    pub demand: Vec<f64>,
    /// Area of each UAV, UAVs in id order.
    pub uav_areas: Vec<usize>,
}

/// Demand per area in `frame`: each active request adds the capacity of all
/// its functions to its UE's area.
pub fn area_demand(world: &World, frame: usize) -> Vec<f64> {
    let mut demand = vec![0.0; world.instance.grid.len()];
    for r in world.requests().iter().filter(|r| r.is_active(frame)) {
        demand[world.ue_area(frame, r.ue)] += r.capacity_req.iter().sum::<f64>();
    }
    demand
}

pub fn tp_state_len(areas: usize, uavs: usize, history: usize) -> usize {
    history * (areas + uavs * areas)
}

/// Flattens the last `history` frames, oldest first, each as the area
/// demand followed by one one-hot area block per UAV. Missing frames at the
/// start of an episode are zeros.
pub fn tp_encode(frames: &[TpFrame], history: usize, areas: usize, uavs: usize) -> Result<Vec<f64>> {
    let block = areas + uavs * areas;
    let mut out = vec![0.0; history * block];
    let take = frames.len().min(history);
    let pad = history - take;
    for (i, f) in frames[frames.len() - take..].iter().enumerate() {
        if f.demand.len() != areas || f.uav_areas.len() != uavs {
            return Err(Error::Dimension(format!(
                "frame with {} areas and {} UAVs, expected {areas} and {uavs}",
                f.demand.len(),
                f.uav_areas.len()
            )));
        }
        let base = (pad + i) * block;
        out[base..base + areas].copy_from_slice(&f.demand);
        for (k, &a) in f.uav_areas.iter().enumerate() {
            if a >= areas {
                return Err(Error::Dimension(format!("UAV area {a} of {areas}")));
            }
            out[base + areas + k * areas + a] = 1.0;
        }
    }
    Ok(out)
}

/// Target area per UAV, UAVs in id order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TpAction {
    pub areas: Vec<usize>,
}

/// Coverage minus weighted relocation energy.
pub fn tp_reward(connected: usize, movement_energy: f64, alpha: f64) -> f64 {
    connected as f64 - alpha * movement_energy
}

/// Binds each UE to a radio node in its area. Among candidates the node with
/// the largest residual capacity wins, ties by lower id; binding a UE
/// consumes its demand from the node's residual. `pinned` nodes are taken
/// whenever they cover the UE. UEs without a candidate stay unbound.
pub fn select_poa(
    ue_areas: &[usize],
    node_areas: &BTreeMap<usize, usize>,
    residual: &[f64],
    ue_demand: &[f64],
    pinned: &BTreeMap<usize, usize>,
) -> Vec<Option<usize>> {
    let mut residual = residual.to_vec();
    let mut out = Vec::with_capacity(ue_areas.len());
    for (ue, &area) in ue_areas.iter().enumerate() {
        let covers = |n: &usize| node_areas.get(n) == Some(&area);
        let chosen = pinned.get(&ue).filter(|n| covers(n)).copied().or_else(|| {
            node_areas
                .iter()
                .filter(|(_, &a)| a == area)
                .map(|(&n, _)| n)
                .fold(None, |best: Option<usize>, n| match best {
                    Some(b) if residual[b] >= residual[n] => Some(b),
                    _ => Some(n),
                })
        });
        if let Some(n) = chosen {
            residual[n] -= ue_demand.get(ue).copied().unwrap_or(0.0);
        }
        out.push(chosen);
    }
    out
}

/// Dueling double Q agent choosing one area per UAV. The network has one
/// output block of |A| actions per UAV; each UAV picks within its block
/// against the same state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpAgent {
    pub learner: Option<Learner>,
    pub areas: usize,
    pub uavs: usize,
    pub history: usize,
    /// Divides demand entries before they reach the network.
    pub demand_scale: f64,
}

impl TpAgent {
    pub fn new(
        areas: usize,
        uavs: usize,
        history: usize,
        demand_scale: f64,
        config: LearnerConfig,
        seed: u64,
    ) -> Result<Self> {
        if areas == 0 || history == 0 {
            return Err(Error::Argument("trajectory agent needs areas and history".into()));
        }
        let learner = if uavs == 0 {
            None
        } else {
            Some(Learner::new(tp_state_len(areas, uavs, history), uavs * areas, config, seed)?)
        };
        Ok(TpAgent {
            learner,
            areas,
            uavs,
            history,
            demand_scale: demand_scale.max(f64::MIN_POSITIVE),
        })
    }

    /// Network input for an encoded state.
    pub fn features(&self, state: &[f64]) -> Vec<f64> {
        let block = self.areas + self.uavs * self.areas;
        state
            .iter()
            .enumerate()
            .map(|(i, v)| if i % block < self.areas { v / self.demand_scale } else { *v })
            .collect()
    }

    fn block_mask(&self, uav: usize) -> Vec<bool> {
        (0..self.uavs * self.areas).map(|i| i / self.areas == uav).collect()
    }

    /// Epsilon-greedy choice, one sub-decision per UAV.
    pub fn step(&mut self, state: &[f64]) -> Result<TpAction> {
        let x = self.features(state);
        let mut areas = Vec::with_capacity(self.uavs);
        for k in 0..self.uavs {
            let mask = self.block_mask(k);
            let learner = self.learner.as_mut().expect("learner exists when UAVs exist");
            areas.push(learner.act(&x, Some(&mask))? - k * self.areas);
        }
        Ok(TpAction { areas })
    }

    pub fn greedy(&self, state: &[f64]) -> Result<TpAction> {
        let x = self.features(state);
        let mut areas = Vec::with_capacity(self.uavs);
        for k in 0..self.uavs {
            let learner = self.learner.as_ref().expect("learner exists when UAVs exist");
            areas.push(learner.greedy(&x, Some(&self.block_mask(k)))? - k * self.areas);
        }
        Ok(TpAction { areas })
    }

    /// Stores one transition per UAV sub-decision, all with `reward`.
    pub fn remember(&mut self, state: &[f64], action: &TpAction, reward: f64, next: &[f64]) -> Result<()> {
        let (x, y) = (self.features(state), self.features(next));
        let areas = self.areas;
        if let Some(learner) = self.learner.as_mut() {
            for (k, &a) in action.areas.iter().enumerate() {
                learner.remember(Transition::new(x.clone(), k * areas + a, reward, y.clone())?)?;
            }
        }
        Ok(())
    }

    pub fn learn(&mut self) -> Result<Option<f64>> {
        match self.learner.as_mut() {
            Some(l) => l.learn(),
            None => Ok(None),
        }
    }
}
