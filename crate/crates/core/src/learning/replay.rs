use std::collections::VecDeque;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

impl Transition {
    pub fn new(state: Vec<f64>, action: usize, reward: f64, next_state: Vec<f64>) -> Result<Self> {
        if state.len() != next_state.len() {
            return Err(Error::Dimension(format!(
                "state has {} features, next state {}",
                state.len(),
                next_state.len()
            )));
        }
        Ok(Transition {
            state,
            action,
            reward,
            next_state,
        })
    }
}

/// Bounded FIFO of transitions with seeded uniform sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayMemory {
    capacity: usize,
    buffer: VecDeque<Transition>,
    rng: SimRng,
}

impl ReplayMemory {
    pub fn new(capacity: usize, rng: SimRng) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Argument("replay capacity must be positive".into()));
        }
        Ok(ReplayMemory {
            capacity,
            buffer: VecDeque::with_capacity(capacity),
            rng,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Appends, evicting the oldest transition when full.
    pub fn push(&mut self, t: Transition) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.buffer.iter()
    }

    /// Up to `batch` distinct transitions drawn uniformly.
    pub fn sample(&mut self, batch: usize) -> Vec<Transition> {
        let n = batch.min(self.buffer.len());
        index::sample(&mut self.rng, self.buffer.len(), n)
            .into_iter()
            .map(|i| self.buffer[i].clone())
            .collect()
    }
}
