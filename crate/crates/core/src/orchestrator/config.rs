use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{PlAgent, Predictor, PredictorMode, TpAgent, DEFAULT_DECAY, DEFAULT_HISTORY, ROUTING_PENALTY};
use crate::allocate::DEFAULT_ALPHA;
use crate::error::{Error, Result};
use crate::learning::LearnerConfig;
use crate::mac::DEFAULT_LAMBDA;
use crate::model::Instance;
use crate::rng::{SeedBundle, Stream};

/// Weight of the MAC reward in the combined reward.
pub const DEFAULT_CHI: f64 = 0.5;
/// Weight of the placement reward in the combined reward.
pub const DEFAULT_KAPPA: f64 = 0.8;
/// Fraction of the horizon trained on low-level rewards only.
pub const DEFAULT_PHASE_FRACTION: f64 = 0.25;
/// Per-action exploration decrement of the toy preset.
pub const TOY_EPSILON_DECREMENT: f64 = 0.005;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Perfect,
    Random,
    OracleReplay,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Perfect => "perfect",
            PolicyKind::Random => "random",
            PolicyKind::OracleReplay => "oracle-replay",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(PolicyKind::Perfect),
            "random" => Ok(PolicyKind::Random),
            "oracle-replay" | "oracle" => Ok(PolicyKind::OracleReplay),
            _ => Err(Error::Argument(format!("unknown policy {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    LowLevel,
    Hierarchical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// History window ℋ of the trajectory state.
    pub history: usize,
    /// Observation weight of the channel belief update.
    pub lambda: f64,
    pub routing_penalty: f64,
    pub predictor: PredictorMode,
    pub issuance_decay: f64,
    pub trajectory: LearnerConfig,
    pub placement: LearnerConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            history: DEFAULT_HISTORY,
            lambda: DEFAULT_LAMBDA,
            routing_penalty: ROUTING_PENALTY,
            predictor: PredictorMode::Reference,
            issuance_decay: DEFAULT_DECAY,
            trajectory: LearnerConfig::trajectory(),
            placement: LearnerConfig::placement(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrchestratorConfig {
    pub alpha: f64,
    pub chi: f64,
    pub kappa: f64,
    pub phase_fraction: f64,
    /// Train the agents online while running.
    pub learn: bool,
    /// Panic on any constraint violation instead of reporting it.
    pub strict: bool,
    pub agents: AgentConfig,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig {
            alpha: DEFAULT_ALPHA,
            chi: DEFAULT_CHI,
            kappa: DEFAULT_KAPPA,
            phase_fraction: DEFAULT_PHASE_FRACTION,
            learn: true,
            strict: false,
            agents: AgentConfig::default(),
        }
    }
}

impl OrchestratorConfig {
    /// Defaults with exploration that decays within one 200-frame episode.
    pub fn toy() -> Self {
        let fast = |c: LearnerConfig| LearnerConfig {
            epsilon_decrement: TOY_EPSILON_DECREMENT,
            ..c
        };
        OrchestratorConfig {
            agents: AgentConfig {
                trajectory: fast(LearnerConfig::trajectory()),
                placement: fast(LearnerConfig::placement()),
                ..AgentConfig::default()
            },
            ..OrchestratorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.chi, self.kappa, self.agents.routing_penalty];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("reward weights must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.phase_fraction) {
            return Err(Error::Config(format!("phase fraction {} outside [0, 1]", self.phase_fraction)));
        }
        if self.agents.history == 0 {
            return Err(Error::Config("history window must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.agents.lambda) {
            return Err(Error::Config(format!("lambda {} outside [0, 1]", self.agents.lambda)));
        }
        Ok(())
    }

    /// First frame of the hierarchical phase.
    pub fn phase_boundary(&self, frames: usize) -> usize {
        (self.phase_fraction * frames as f64).floor() as usize
    }

    pub fn phase(&self, frame: usize, frames: usize) -> Phase {
        if frame < self.phase_boundary(frames) {
            Phase::LowLevel
        } else {
            Phase::Hierarchical
        }
    }

    /// Combined reward R_TP + χ·R_MAC + κ·R_PL.
    pub fn combined_reward(&self, tp: f64, mac: f64, pl: f64) -> f64 {
        tp + self.chi * mac + self.kappa * pl
    }
}

/// The learning agents of one controller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agents {
    pub tp: TpAgent,
    pub pl: PlAgent,
    pub predictor: Predictor,
}

impl Agents {
    /// Fresh agents shaped for `instance`, seeded from the agent streams.
    pub fn new(instance: &Instance, config: &AgentConfig, seeds: SeedBundle) -> Result<Self> {
        let tp_seed: u64 = seeds.stream(Stream::TrajectoryAgent).random();
        let pl_seed: u64 = seeds.stream(Stream::PlacementAgent).random();
        let pred_seed: u64 = seeds.stream(Stream::Predictor).random();
        let scale = instance
            .nodes
            .iter()
            .map(|n| n.processing_capacity)
            .fold(1.0, f64::max);
        let tp = TpAgent::new(
            instance.grid.len(),
            instance.uav_ids().len(),
            config.history,
            scale,
            config.trajectory.clone(),
            tp_seed,
        )?;
        let pl = PlAgent::new(&instance.nodes, instance.function_count(), config.placement.clone(), pl_seed)?;
        let mut predictor = Predictor::new(instance.grid.clone(), instance.services.len(), config.issuance_decay)?;
        if config.predictor == PredictorMode::Learned {
            let learner = LearnerConfig {
                hidden: vec![32],
                ..config.trajectory.clone()
            };
            predictor = predictor.with_learned(learner, pred_seed)?;
        }
        Ok(Agents { tp, pl, predictor })
    }

    /// Whether the agents' shapes fit `instance`.
    pub fn fits(&self, instance: &Instance) -> bool {
        self.tp.areas == instance.grid.len()
            && self.tp.uavs == instance.uav_ids().len()
            && self.pl.nodes == instance.nodes.len()
            && self.pl.functions == instance.function_count()
    }

    /// Clears the predictor's per-episode observations; learned weights
    /// are kept.
    pub fn reset_episode(&mut self) {
        self.predictor.reset();
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).map_err(|e| Error::Serialize(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}
