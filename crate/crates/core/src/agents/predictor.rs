use serde::{Deserialize, Serialize};

use crate::environment::{UeState, STRAIGHT_PROBABILITY, TURN_PROBABILITY};
use crate::error::{Error, Result};
use crate::learning::{Learner, LearnerConfig, Transition};
use crate::model::{AreaGrid, Heading};

/// Per-observation decay of the issuance frequency estimate.
pub const DEFAULT_DECAY: f64 = 0.98;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorMode {
    #[default]
    Reference,
    Learned,
}

/// A (UE, service) pair with its forecast probability of being requested
/// in the next frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelyRequest {
    pub ue: usize,
    pub service: usize,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    /// Next-frame area distribution per UE.
    pub ue_areas: Vec<Vec<f64>>,
    /// Per-area, per-service probability that an attached UE issues a
    /// request in a frame.
    pub issuance: Vec<Vec<f64>>,
    /// Every (UE, service) pair, most likely first.
    pub likely: Vec<LikelyRequest>,
}

impl PredictionReport {
    pub fn probability(&self, ue: usize, service: usize) -> f64 {
        self.likely
            .iter()
            .find(|l| l.ue == ue && l.service == service)
            .map_or(0.0, |l| l.probability)
    }
}

/// Forward turns in the order straight, left, right, with their weights.
fn turn_weights(heading: Heading) -> [(Heading, f64); 3] {
    [
        (heading, STRAIGHT_PROBABILITY),
        (heading.left(), TURN_PROBABILITY),
        (heading.right(), TURN_PROBABILITY),
    ]
}

/// One-step law of the Manhattan mobility model over (area, heading),
/// matching the simulator: infeasible turns are re-drawn, a dead end
/// reverses, an isolated area stays.
pub fn transition(grid: &AreaGrid, area: usize, heading: Heading) -> Vec<(usize, Heading, f64)> {
    let feasible: Vec<(usize, Heading, f64)> = turn_weights(heading)
        .into_iter()
        .filter_map(|(h, w)| grid.step(area, h).map(|a| (a, h, w)))
        .collect();
    if feasible.is_empty() {
        return match grid.step(area, heading.reverse()) {
            Some(a) => vec![(a, heading.reverse(), 1.0)],
            None => vec![(area, heading, 1.0)],
        };
    }
    let total: f64 = feasible.iter().map(|x| x.2).sum();
    feasible.into_iter().map(|(a, h, w)| (a, h, w / total)).collect()
}

/// Area distribution after `steps` moves from a known state.
pub fn area_distribution_after(grid: &AreaGrid, state: &UeState, steps: usize) -> Vec<f64> {
    let mut mass = vec![[0.0; 4]; grid.len()];
    mass[state.area][state.heading.index()] = 1.0;
    for _ in 0..steps {
        let mut next = vec![[0.0; 4]; grid.len()];
        for (a, row) in mass.iter().enumerate() {
            for h in Heading::ALL {
                let p = row[h.index()];
                if p == 0.0 {
                    continue;
                }
                for (b, g, w) in transition(grid, a, h) {
                    next[b][g.index()] += p * w;
                }
            }
        }
        mass = next;
    }
    mass.iter().map(|row| row.iter().sum()).collect()
}

/// Reference predictor: the known mobility law for positions and an
/// exponentially decayed empirical frequency for request issuance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    grid: AreaGrid,
    services: usize,
    decay: f64,
    last: Option<Vec<UeState>>,
    /// Decayed issuance counts per area and service.
    issued: Vec<Vec<f64>>,
    /// Decayed observation weight per area.
    weight: Vec<f64>,
    /// Learned next-area model, rewarded by prediction accuracy.
    learned: Option<Learner>,
}

impl Predictor {
    pub fn new(grid: AreaGrid, services: usize, decay: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&decay) || decay == 0.0 {
            return Err(Error::Argument(format!("decay {decay} outside (0, 1]")));
        }
        let areas = grid.len();
        Ok(Predictor {
            grid,
            services,
            decay,
            last: None,
            issued: vec![vec![0.0; services]; areas],
            weight: vec![0.0; areas],
            learned: None,
        })
    }

    /// Replaces the mobility law by a Q-learned next-area guess for the
    /// one-frame forecast. The reward of a guess is 1 when it matches.
    pub fn with_learned(mut self, config: LearnerConfig, seed: u64) -> Result<Self> {
        let areas = self.grid.len();
        self.learned = Some(Learner::new(areas + 4, areas, config, seed)?);
        Ok(self)
    }

    /// Forgets observations, keeping any learned model.
    pub fn reset(&mut self) {
        self.last = None;
        self.issued.iter_mut().for_each(|row| row.fill(0.0));
        self.weight.fill(0.0);
    }

    pub fn mode(&self) -> PredictorMode {
        if self.learned.is_some() {
            PredictorMode::Learned
        } else {
            PredictorMode::Reference
        }
    }

    fn features(&self, state: &UeState) -> Vec<f64> {
        let areas = self.grid.len();
        let mut x = vec![0.0; areas + 4];
        x[state.area] = 1.0;
        x[areas + state.heading.index()] = 1.0;
        x
    }

    /// Records one frame: UE positions and the (UE, service) pairs newly
    /// issued in it.
    pub fn observe(&mut self, ues: &[UeState], issued: &[(usize, usize)]) -> Result<()> {
        if let (Some(prev), true) = (self.last.clone(), self.learned.is_some()) {
            for u in ues {
                let Some(p) = prev.iter().find(|p| p.ue == u.ue) else {
                    continue;
                };
                let (x, y) = (self.features(p), self.features(u));
                let learner = self.learned.as_mut().expect("checked above");
                let guess = learner.act(&x, None)?;
                let reward = if guess == u.area { 1.0 } else { 0.0 };
                learner.remember(Transition::new(x, guess, reward, y)?)?;
                learner.learn()?;
            }
        }
        for u in ues {
            let a = u.area;
            self.weight[a] = self.decay * self.weight[a] + 1.0;
            for s in 0..self.services {
                let hit = issued.contains(&(u.ue, s));
                self.issued[a][s] = self.decay * self.issued[a][s] + if hit { 1.0 } else { 0.0 };
            }
        }
        self.last = Some(ues.to_vec());
        Ok(())
    }

    /// Estimated issuance probability of `service` by a UE in `area`.
    pub fn issuance_rate(&self, area: usize, service: usize) -> f64 {
        if self.weight[area] == 0.0 {
            return 1.0 / self.services.max(1) as f64;
        }
        (self.issued[area][service] / self.weight[area]).clamp(0.0, 1.0)
    }

    pub fn last_states(&self) -> Option<&[UeState]> {
        self.last.as_deref()
    }

    /// Area distribution of `ue` `steps` frames after the last observation;
    /// uniform without history.
    pub fn area_after(&self, ue: usize, steps: usize) -> Vec<f64> {
        match self.last.as_ref().and_then(|l| l.iter().find(|s| s.ue == ue)) {
            Some(state) => area_distribution_after(&self.grid, state, steps),
            None => vec![1.0 / self.grid.len() as f64; self.grid.len()],
        }
    }

    /// Forecast for the frame after the last observation. `ues` is the
    /// number of UEs to report on.
    pub fn predict(&self, ues: usize) -> Result<PredictionReport> {
        let mut ue_areas = Vec::with_capacity(ues);
        for u in 0..ues {
            ue_areas.push(self.next_area(u)?);
        }
        let issuance: Vec<Vec<f64>> = (0..self.grid.len())
            .map(|a| (0..self.services).map(|s| self.issuance_rate(a, s)).collect())
            .collect();
        let mut likely = Vec::with_capacity(ues * self.services);
        for (ue, dist) in ue_areas.iter().enumerate() {
            for service in 0..self.services {
                let p: f64 = dist.iter().zip(&issuance).map(|(pa, rates)| pa * rates[service]).sum();
                likely.push(LikelyRequest {
                    ue,
                    service,
                    probability: p.clamp(0.0, 1.0),
                });
            }
        }
        likely.sort_by(|a, b| {
            b.probability
                .total_cmp(&a.probability)
                .then(a.ue.cmp(&b.ue))
                .then(a.service.cmp(&b.service))
        });
        Ok(PredictionReport {
            ue_areas,
            issuance,
            likely,
        })
    }

    fn next_area(&self, ue: usize) -> Result<Vec<f64>> {
        let state = self.last.as_ref().and_then(|l| l.iter().find(|s| s.ue == ue));
        match (&self.learned, state) {
            (Some(learner), Some(s)) => {
                let mut dist = vec![0.0; self.grid.len()];
                dist[learner.greedy(&self.features(s), None)?] = 1.0;
                Ok(dist)
            }
            _ => Ok(self.area_after(ue, 1)),
        }
    }
}
