use rand::Rng;
use serde::{Deserialize, Serialize};

use super::net::{Activation, DuelingNet};
use super::replay::Transition;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Discount factor of the reference configuration.
pub const DEFAULT_DISCOUNT: f64 = 0.8;
pub const DEFAULT_LEARNING_RATE: f64 = 0.001;
pub const DEFAULT_SYNC_PERIOD: u64 = 200;

/// Online and target dueling networks with the double-Q update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QFunction {
    pub online: DuelingNet,
    pub target: DuelingNet,
    pub learning_rate: f64,
    pub discount: f64,
    pub sync_period: u64,
    /// Completed `train_step` calls.
    pub updates: u64,
}

impl QFunction {
    pub fn new(
        inputs: usize,
        hidden: &[usize],
        actions: usize,
        activation: Activation,
        rng: &mut SimRng,
    ) -> Result<Self> {
        let online = DuelingNet::new(inputs, hidden, actions, activation, rng)?;
        Ok(QFunction {
            target: online.clone(),
            online,
            learning_rate: DEFAULT_LEARNING_RATE,
            discount: DEFAULT_DISCOUNT,
            sync_period: DEFAULT_SYNC_PERIOD,
            updates: 0,
        })
    }

    pub fn from_net(net: DuelingNet, learning_rate: f64, discount: f64, sync_period: u64) -> Self {
        QFunction {
            target: net.clone(),
            online: net,
            learning_rate,
            discount,
            sync_period,
            updates: 0,
        }
    }

    pub fn actions(&self) -> usize {
        self.online.actions()
    }

    /// Action values of the online network.
    pub fn dueling_q(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.online.q_values(state)
    }

    /// Bootstrapped target: the online network picks the next action, the
    /// target network values it.
    pub fn double_target(&self, t: &Transition) -> Result<f64> {
        let next = self.online.q_values(&t.next_state)?;
        let pick = argmax(&next, None).expect("networks have at least one action");
        let value = self.target.q_values(&t.next_state)?[pick];
        Ok(t.reward + self.discount * value)
    }

    /// One gradient step on the mean temporal-difference objective.
    /// Returns the mean squared TD error before the step.
    pub fn train_step(&mut self, batch: &[Transition]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Argument("empty training batch".into()));
        }
        let mut grad = vec![0.0; self.online.param_count()];
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        for t in batch {
            if t.action >= self.actions() {
                return Err(Error::Argument(format!("action {} out of {}", t.action, self.actions())));
            }
            let y = self.double_target(t)?;
            let q = self.online.q_values(&t.state)?[t.action];
            let delta = y - q;
            loss += delta * delta;
            self.online.accumulate_gradient(&t.state, t.action, delta * scale, &mut grad)?;
        }
        if grad.iter().any(|g| *g != 0.0) {
            let mut params = self.online.params();
            for (p, g) in params.iter_mut().zip(&grad) {
                *p += self.learning_rate * g;
            }
            self.online.set_params(&params)?;
        }
        self.updates += 1;
        if self.sync_period > 0 && self.updates % self.sync_period == 0 {
            self.sync_target();
        }
        Ok(loss * scale)
    }

    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }
}

/// Index of the largest value among allowed entries, lowest index on ties.
pub fn argmax(values: &[f64], mask: Option<&[bool]>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Linearly decaying exploration rate with a floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub epsilon: f64,
    pub decrement: f64,
    pub floor: f64,
}

impl EpsilonSchedule {
    pub fn new(epsilon: f64, decrement: f64, floor: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&floor) || !(floor..=1.0).contains(&epsilon) || decrement < 0.0 {
            return Err(Error::Argument(format!(
                "epsilon schedule ({epsilon}, {decrement}, {floor}) is not monotone within [floor, 1]"
            )));
        }
        Ok(EpsilonSchedule {
            epsilon,
            decrement,
            floor,
        })
    }

    pub fn decay(&mut self) {
        self.epsilon = (self.epsilon - self.decrement).max(self.floor);
    }
}

/// Explores uniformly over valid actions with probability ε, otherwise
/// takes the best valid action.
pub fn epsilon_greedy(
    qf: &QFunction,
    state: &[f64],
    schedule: &EpsilonSchedule,
    mask: Option<&[bool]>,
    rng: &mut SimRng,
) -> Result<usize> {
    let n = qf.actions();
    if let Some(m) = mask {
        if m.len() != n {
            return Err(Error::Dimension(format!("mask of {} for {n} actions", m.len())));
        }
    }
    let valid: Vec<usize> = (0..n).filter(|&i| mask.is_none_or(|m| m[i])).collect();
    if valid.is_empty() {
        return Err(Error::NoValidAction);
    }
    let q = qf.dueling_q(state)?;
    if rng.random::<f64>() < schedule.epsilon {
        Ok(valid[rng.random_range(0..valid.len())])
    } else {
        Ok(argmax(&q, mask).expect("valid action exists"))
    }
}
