use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::environment::ArrivalConfig;
use crate::error::{Error, Result};
use crate::model::GeneratorConfig;
use crate::orchestrator::{OrchestratorConfig, PolicyKind};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "AERO_ORCH_THREADS";
/// New requests per frame in the desk channel sweep.
pub const DESK_CHANNELS_RATE: f64 = 8.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// One point, no sweep.
    #[default]
    Single,
    /// Sweep of the mean number of new requests per frame.
    RequestsSweep,
    /// Sweep of the total node count.
    NetworkSweep,
    /// Sweep of the channel count.
    ChannelsSweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Single => "single",
            Scenario::RequestsSweep => "requests-sweep",
            Scenario::NetworkSweep => "network-sweep",
            Scenario::ChannelsSweep => "channels-sweep",
        }
    }

    /// Label of the swept quantity.
    pub fn axis(self) -> &'static str {
        match self {
            Scenario::Single => "point",
            Scenario::RequestsSweep => "new requests per frame",
            Scenario::NetworkSweep => "nodes",
            Scenario::ChannelsSweep => "channels",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Scenario::Single),
            "requests-sweep" | "requests" => Ok(Scenario::RequestsSweep),
            "network-sweep" | "network" => Ok(Scenario::NetworkSweep),
            "channels-sweep" | "channels" => Ok(Scenario::ChannelsSweep),
            _ => Err(Error::Argument(format!("unknown scenario {s:?}"))),
        }
    }
}

/// One experiment: which worlds to build, which policies to compare on
/// them, and where to write the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Instance file; when absent, instances come from `generator`.
    pub instance: Option<PathBuf>,
    pub generator: GeneratorConfig,
    /// Request arrival process on top of the instance's listed requests.
    pub arrivals: Option<ArrivalConfig>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    /// Horizon override.
    pub frames: Option<usize>,
    pub scenario: Scenario,
    pub sweep: Vec<f64>,
    pub out: PathBuf,
    /// Episodes the perfect policy trains on before the measured one, each
    /// on a fresh realization of the same instance.
    pub training_episodes: usize,
    /// Saved agents the perfect policy starts from.
    pub checkpoint: Option<PathBuf>,
    /// Write every frame outcome to `trace.ndjson`.
    pub trace: bool,
    pub orchestrator: OrchestratorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            instance: None,
            generator: GeneratorConfig::default(),
            arrivals: Some(ArrivalConfig::default()),
            policies: vec![PolicyKind::Perfect, PolicyKind::Random],
            seeds: vec![0],
            frames: None,
            scenario: Scenario::Single,
            sweep: Vec::new(),
            out: PathBuf::from("out"),
            training_episodes: 0,
            checkpoint: None,
            trace: false,
            orchestrator: OrchestratorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::new(),
            message: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Loads a run file; relative instance and checkpoint paths are taken
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.instance, &mut config.checkpoint].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.orchestrator.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        if self.sweep.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        if self.scenario != Scenario::Single && self.sweep.is_empty() {
            return Err(Error::Config(format!("scenario {} needs sweep values", self.scenario)));
        }
        let whole = |v: f64| v.fract() == 0.0 && v >= 1.0;
        for &v in &self.sweep {
            let ok = match self.scenario {
                Scenario::Single => true,
                Scenario::RequestsSweep => v.is_finite() && v >= 0.0,
                Scenario::NetworkSweep | Scenario::ChannelsSweep => whole(v),
            };
            if !ok {
                return Err(Error::Config(format!("sweep value {v} is invalid for {}", self.scenario)));
            }
        }
        if self.instance.is_some() && matches!(self.scenario, Scenario::NetworkSweep | Scenario::ChannelsSweep) {
            return Err(Error::Config(format!(
                "scenario {} varies the generated topology and cannot use an instance file",
                self.scenario
            )));
        }
        Ok(())
    }

    /// Sweep points in order; a single scenario has the one point 0.
    pub fn points(&self) -> Vec<f64> {
        match self.scenario {
            Scenario::Single => vec![0.0],
            _ => self.sweep.clone(),
        }
    }

    /// Policies in row order, without repeats.
    pub fn policy_order(&self) -> Vec<PolicyKind> {
        let mut p = self.policies.clone();
        p.sort();
        p.dedup();
        p
    }

    /// Five toy worlds, each measured after five training episodes.
    pub fn toy() -> Self {
        RunConfig {
            generator: GeneratorConfig::toy(),
            seeds: (0..5).collect(),
            training_episodes: 5,
            orchestrator: OrchestratorConfig::toy(),
            ..RunConfig::default()
        }
    }

    /// Preset by name: `toy` or a scaling scenario's name.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "toy" => Ok(RunConfig::toy()),
            other => match other.parse::<Scenario>()? {
                Scenario::Single => Err(Error::Argument("the single scenario has no desk preset".into())),
                s => Ok(RunConfig::desk(s)),
            },
        }
    }

    /// Desk-scale preset of a scaling scenario: a 4×4 grid, ten slots per
    /// frame, 200 frames, twenty seeds, perfect against random.
    ///
    /// Chains have one or two functions and routes up to six hops, so the
    /// sparse generated topologies can still carry two-function chains.
    /// Exploration decays within the episode ([`OrchestratorConfig::toy`]).
    /// The channel sweep runs at [`DESK_CHANNELS_RATE`] new requests per
    /// frame so the uplink is contended at two channels.
    pub fn desk(scenario: Scenario) -> Self {
        let mut generator = GeneratorConfig::default().with_node_count(6);
        generator.functions_per_service = (1, 2);
        generator.max_hops = 6;
        let mut arrivals = ArrivalConfig::default();
        let sweep = match scenario {
            Scenario::Single => Vec::new(),
            Scenario::RequestsSweep => vec![2.0, 4.0, 6.0, 8.0],
            Scenario::NetworkSweep => vec![6.0, 7.0, 8.0, 9.0, 10.0],
            Scenario::ChannelsSweep => {
                arrivals.rate = DESK_CHANNELS_RATE;
                vec![2.0, 4.0, 6.0, 8.0]
            }
        };
        RunConfig {
            generator,
            arrivals: Some(arrivals),
            seeds: (0..20).collect(),
            scenario,
            sweep,
            orchestrator: OrchestratorConfig::toy(),
            ..RunConfig::default()
        }
    }
}

/// Worker count: available parallelism, capped by [`THREADS_ENV`].
pub fn worker_threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => available.min(cap),
        _ => available,
    }
}
