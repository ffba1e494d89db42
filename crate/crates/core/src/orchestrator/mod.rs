//! The per-frame decision pipeline, episodes, the random baseline and
//! allocation replay.

mod config;
mod episode;
mod frame;

pub use config::{
    AgentConfig, Agents, OrchestratorConfig, Phase, PolicyKind, DEFAULT_CHI, DEFAULT_KAPPA,
    DEFAULT_PHASE_FRACTION, TOY_EPSILON_DECREMENT,
};
pub use episode::{
    read_trace, run_episode, validate_world, write_trace, Checkpoint, Episode, Orchestrator,
    ORCHESTRATOR_CHECKPOINT_VERSION,
};
pub use frame::{
    run_frame, EpisodeState, FailReason, FrameMetrics, FrameOutcome, RequestStatus, Rewards,
};
