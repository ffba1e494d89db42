//! Dueling double Q-learning: network, target computation, replay memory
//! and exploration.

mod learner;
mod net;
mod qfunction;
mod replay;

pub use learner::{Learner, LearnerConfig, CHECKPOINT_VERSION};
pub use net::{dueling_combine, Activation, Dense, DuelingNet, LEAKY_SLOPE};
pub use qfunction::{
    argmax, epsilon_greedy, EpsilonSchedule, QFunction, DEFAULT_DISCOUNT, DEFAULT_LEARNING_RATE,
    DEFAULT_SYNC_PERIOD,
};
pub use replay::{ReplayMemory, Transition};
