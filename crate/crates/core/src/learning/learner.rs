use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::Activation;
use super::qfunction::{
    epsilon_greedy, EpsilonSchedule, QFunction, DEFAULT_DISCOUNT, DEFAULT_LEARNING_RATE,
    DEFAULT_SYNC_PERIOD,
};
use super::replay::{ReplayMemory, Transition};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, SimRng};

/// Version tag written into checkpoints.
pub const CHECKPOINT_VERSION: u32 = 1;

/// Hyperparameters of one learning agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub discount: f64,
    pub sync_period: u64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub epsilon: f64,
    pub epsilon_decrement: f64,
    pub epsilon_floor: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            hidden: vec![64, 64],
            activation: Activation::Tanh,
            learning_rate: DEFAULT_LEARNING_RATE,
            discount: DEFAULT_DISCOUNT,
            sync_period: DEFAULT_SYNC_PERIOD,
            batch_size: 32,
            replay_capacity: 2000,
            epsilon: 1.0,
            epsilon_decrement: 0.00005,
            epsilon_floor: 0.0001,
        }
    }
}

impl LearnerConfig {
    /// Trajectory-planning defaults.
    pub fn trajectory() -> Self {
        LearnerConfig::default()
    }

    /// Placement defaults: leaky rectifier, smaller replay memory.
    pub fn placement() -> Self {
        LearnerConfig {
            activation: Activation::LeakyRelu,
            replay_capacity: 1000,
            ..LearnerConfig::default()
        }
    }
}

/// Q-function, replay memory, exploration schedule and the generator that
/// drives exploration, trained together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Learner {
    pub version: u32,
    pub config: LearnerConfig,
    pub qf: QFunction,
    pub replay: ReplayMemory,
    pub schedule: EpsilonSchedule,
    policy_rng: SimRng,
    /// Actions taken so far.
    pub steps: u64,
}

impl Learner {
    /// Builds a learner whose initial weights, replay sampling and
    /// exploration come from three streams of `seed`.
    pub fn new(inputs: usize, actions: usize, config: LearnerConfig, seed: u64) -> Result<Self> {
        let mut init = stream_rng(seed, 1);
        let mut qf = QFunction::new(inputs, &config.hidden, actions, config.activation, &mut init)?;
        qf.learning_rate = config.learning_rate;
        qf.discount = config.discount;
        qf.sync_period = config.sync_period;
        let schedule = EpsilonSchedule::new(config.epsilon, config.epsilon_decrement, config.epsilon_floor)?;
        Ok(Learner {
            version: CHECKPOINT_VERSION,
            replay: ReplayMemory::new(config.replay_capacity, stream_rng(seed, 2))?,
            policy_rng: stream_rng(seed, 3),
            config,
            qf,
            schedule,
            steps: 0,
        })
    }

    pub fn inputs(&self) -> usize {
        self.qf.online.inputs()
    }

    pub fn actions(&self) -> usize {
        self.qf.actions()
    }

    /// Exploring action; decays ε afterwards.
    pub fn act(&mut self, state: &[f64], mask: Option<&[bool]>) -> Result<usize> {
        let a = epsilon_greedy(&self.qf, state, &self.schedule, mask, &mut self.policy_rng)?;
        self.schedule.decay();
        self.steps += 1;
        Ok(a)
    }

    /// Best valid action without exploration.
    pub fn greedy(&self, state: &[f64], mask: Option<&[bool]>) -> Result<usize> {
        let q = self.qf.dueling_q(state)?;
        super::qfunction::argmax(&q, mask).ok_or(Error::NoValidAction)
    }

    pub fn remember(&mut self, t: Transition) -> Result<()> {
        if t.state.len() != self.inputs() || t.next_state.len() != self.inputs() {
            return Err(Error::Dimension(format!(
                "transition has {} features, learner expects {}",
                t.state.len(),
                self.inputs()
            )));
        }
        self.replay.push(t);
        Ok(())
    }

    /// Trains on one sampled batch once the memory holds a full batch.
    pub fn learn(&mut self) -> Result<Option<f64>> {
        if self.replay.len() < self.config.batch_size {
            return Ok(None);
        }
        let batch = self.replay.sample(self.config.batch_size);
        self.qf.train_step(&batch).map(Some)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let l: Learner = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: Default::default(),
            message: e.to_string(),
        })?;
        if l.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!("checkpoint version {} unsupported", l.version)));
        }
        Ok(l)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
