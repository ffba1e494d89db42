use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::{Agents, OrchestratorConfig, PolicyKind};
use super::frame::{run_frame, EpisodeState, FrameOutcome};
use crate::allocate::{check_constraints, ConstraintViolation};
use crate::environment::World;
use crate::error::{Error, Result};
use crate::model::Allocation;

/// Version tag of orchestrator checkpoints.
pub const ORCHESTRATOR_CHECKPOINT_VERSION: u32 = 1;

/// Completed episode: per-frame outcomes, the full allocation and the
/// horizon-level constraint check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub trace: Vec<FrameOutcome>,
    pub allocation: Allocation,
    pub violations: Vec<ConstraintViolation>,
}

impl Episode {
    pub fn accepted(&self) -> usize {
        self.trace.iter().map(|f| f.metrics.accepted.len()).sum()
    }

    pub fn energy(&self) -> f64 {
        self.trace.iter().map(|f| f.metrics.energy.total()).sum()
    }

    /// Latencies of accepted requests, in completion order.
    pub fn latencies(&self) -> Vec<f64> {
        self.trace
            .iter()
            .flat_map(|f| f.metrics.latencies.iter().map(|l| l.1))
            .collect()
    }

    pub fn objective(&self, alpha: f64) -> f64 {
        self.accepted() as f64 - alpha * self.energy()
    }
}

/// One controller bound to a world for one episode.
pub struct Orchestrator<'w> {
    pub world: &'w World,
    pub config: OrchestratorConfig,
    pub policy: PolicyKind,
    pub agents: Agents,
    pub state: EpisodeState,
    replay: Option<Allocation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub agents: Agents,
    pub state: EpisodeState,
}

impl<'w> Orchestrator<'w> {
    pub fn new(world: &'w World, config: OrchestratorConfig, policy: PolicyKind, agents: Agents) -> Result<Self> {
        config.validate()?;
        validate_world(world)?;
        if !agents.fits(&world.instance) {
            return Err(Error::Config("agents were built for a differently shaped instance".into()));
        }
        let state = EpisodeState::new(world, &config)?;
        Ok(Orchestrator {
            world,
            config,
            policy,
            agents,
            state,
            replay: None,
        })
    }

    /// Sets the allocation replayed by [`PolicyKind::OracleReplay`].
    pub fn with_replay(mut self, allocation: Allocation) -> Self {
        self.replay = Some(allocation);
        self
    }

    pub fn is_finished(&self) -> bool {
        self.state.frame >= self.world.frames()
    }

    pub fn run_frame(&mut self) -> Result<FrameOutcome> {
        run_frame(
            self.world,
            &mut self.agents,
            &mut self.state,
            self.policy,
            self.replay.as_ref(),
            &self.config,
        )
    }

    /// Runs the remaining frames.
    pub fn run(&mut self) -> Result<Episode> {
        let mut trace = Vec::with_capacity(self.world.frames());
        while !self.is_finished() {
            trace.push(self.run_frame()?);
        }
        let violations = check_constraints(&self.state.allocation, self.world)?;
        if self.config.strict && !violations.is_empty() {
            let listing: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            panic!("episode violates constraints: {}", listing.join("; "));
        }
        Ok(Episode {
            trace,
            allocation: self.state.allocation.clone(),
            violations,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: ORCHESTRATOR_CHECKPOINT_VERSION,
            agents: self.agents.clone(),
            state: self.state.clone(),
        }
    }

    /// Resumes from a checkpoint taken at a frame boundary.
    pub fn restore(&mut self, checkpoint: Checkpoint) -> Result<()> {
        if checkpoint.version != ORCHESTRATOR_CHECKPOINT_VERSION {
            return Err(Error::Config(format!("checkpoint version {}", checkpoint.version)));
        }
        if !checkpoint.agents.fits(&self.world.instance) {
            return Err(Error::Config("checkpoint agents do not fit the instance".into()));
        }
        self.agents = checkpoint.agents;
        self.state = checkpoint.state;
        Ok(())
    }

    pub fn into_agents(self) -> Agents {
        self.agents
    }
}

impl Checkpoint {
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

/// Rejects worlds no request could ever be served in.
pub fn validate_world(world: &World) -> Result<()> {
    let slots = world.slots();
    let reqs = world.requests();
    if !reqs.is_empty() && reqs.iter().all(|r| r.required_slots > slots) {
        return Err(Error::Config(format!(
            "every request needs more than the {slots} slots of a frame"
        )));
    }
    Ok(())
}

/// Runs a full episode with `agents`, returning the trace and the agents as
/// they ended.
pub fn run_episode(
    world: &World,
    config: &OrchestratorConfig,
    policy: PolicyKind,
    mut agents: Agents,
    replay: Option<Allocation>,
) -> Result<(Episode, Agents)> {
    agents.reset_episode();
    let mut orch = Orchestrator::new(world, config.clone(), policy, agents)?;
    if let Some(a) = replay {
        orch = orch.with_replay(a);
    }
    let episode = orch.run()?;
    Ok((episode, orch.into_agents()))
}

/// Writes a header line followed by one JSON record per frame.
pub fn write_trace<H: Serialize, W: Write>(header: &H, trace: &[FrameOutcome], mut out: W) -> Result<()> {
    let ser = |e: serde_json::Error| Error::Serialize(e.to_string());
    let io = |e: std::io::Error| Error::Serialize(e.to_string());
    writeln!(out, "{}", serde_json::to_string(header).map_err(ser)?).map_err(io)?;
    for f in trace {
        writeln!(out, "{}", serde_json::to_string(f).map_err(ser)?).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a trace written by [`write_trace`].
pub fn read_trace<H: DeserializeOwned, R: BufRead>(input: R) -> Result<(H, Vec<FrameOutcome>)> {
    let parse = |line: usize, e: serde_json::Error| Error::Parse {
        path: format!("trace line {line}").into(),
        message: e.to_string(),
    };
    let mut lines = input.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Serialize("empty trace".into()))?;
    let first = first.map_err(|e| Error::Serialize(e.to_string()))?;
    let header = serde_json::from_str(&first).map_err(|e| parse(1, e))?;
    let mut frames = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::Serialize(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        frames.push(serde_json::from_str(&line).map_err(|e| parse(i + 1, e))?);
    }
    Ok((header, frames))
}
