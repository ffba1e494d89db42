use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{worker_threads, RunConfig, Scenario};
use super::stats::{mean, std_dev};
use crate::allocate::{oracle_solve, OracleLimits, OracleSolution};
use crate::environment::{ArrivalConfig, World};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::orchestrator::{run_episode, Agents, Episode, FrameOutcome, OrchestratorConfig, PolicyKind};
use crate::rng::SeedBundle;

/// Measurements of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub point: f64,
    pub policy: PolicyKind,
    pub seed: u64,
    /// Requests whose window fits the horizon.
    pub requests: usize,
    pub accepted: usize,
    pub energy: f64,
    pub acceptance_pct: f64,
    pub energy_per_request: f64,
    /// Mean end-to-end latency of accepted requests; 0 when none was.
    pub latency_ms: f64,
    pub objective: f64,
    /// Exact optimum of the same world, when it fits the oracle limits.
    pub oracle_objective: Option<f64>,
}

impl EpisodeSummary {
    pub fn new(
        point: f64,
        policy: PolicyKind,
        seed: u64,
        world: &World,
        episode: &Episode,
        alpha: f64,
        oracle_objective: Option<f64>,
    ) -> Self {
        let requests = world.requests().iter().filter(|r| world.fits_horizon(r)).count();
        let accepted = episode.accepted();
        let energy = episode.energy();
        let per = requests.max(1) as f64;
        EpisodeSummary {
            point,
            policy,
            seed,
            requests,
            accepted,
            energy,
            acceptance_pct: 100.0 * accepted as f64 / per,
            energy_per_request: energy / per,
            latency_ms: mean(&episode.latencies()),
            objective: episode.objective(alpha),
            oracle_objective,
        }
    }
}

/// One line of `metrics.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario_point: f64,
    pub policy: PolicyKind,
    pub acceptance_mean: f64,
    pub acceptance_std: f64,
    pub energy_mean: f64,
    pub energy_std: f64,
    pub latency_mean: f64,
    pub latency_std: f64,
    pub oracle_ratio: Option<f64>,
}

/// A frame outcome tagged with the episode it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub point: f64,
    pub policy: PolicyKind,
    pub seed: u64,
    pub outcome: FrameOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub rows: Vec<MetricsRow>,
    /// Per-episode measurements in (point, policy, seed) order.
    pub episodes: Vec<EpisodeSummary>,
    /// Frame records, kept only when the run asks for a trace.
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

/// Instance and arrival process of one sweep point and seed, before the
/// exogenous processes are realized.
pub fn build_instance(config: &RunConfig, point: f64, seed: u64) -> Result<(Instance, Option<ArrivalConfig>)> {
    let mut instance = match &config.instance {
        Some(path) => {
            let mut inst = Instance::load(path)?;
            inst.seeds = SeedBundle::new(seed);
            inst
        }
        None => {
            let mut g = config.generator.clone();
            match config.scenario {
                Scenario::NetworkSweep => g = g.with_node_count(point as usize),
                Scenario::ChannelsSweep => g.channels = point as usize,
                _ => {}
            }
            if let Some(f) = config.frames {
                g.total_frames = f;
            }
            g.generate(seed)?
        }
    };
    if let Some(f) = config.frames {
        instance.time.total_frames = f;
    }
    let mut arrivals = config.arrivals.clone();
    if config.scenario == Scenario::RequestsSweep {
        arrivals = Some(ArrivalConfig {
            rate: point,
            ..arrivals.unwrap_or_default()
        });
    }
    Ok((instance, arrivals))
}

pub fn build_world(config: &RunConfig, point: f64, seed: u64) -> Result<World> {
    let (instance, arrivals) = build_instance(config, point, seed)?;
    World::realize(&instance, arrivals.as_ref())
}

/// Seed of the `episode`-th training realization for an evaluation seed.
pub fn training_seed(seed: u64, episode: usize) -> u64 {
    (seed ^ 0x5DEE_CE66_D1CE_4E5B).wrapping_add((episode as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Trains `agents` on `episodes` fresh realizations of `instance`, each
/// with its own exogenous seeds. Returns the agents and the mean training
/// reward of every episode.
pub fn train_agents(
    instance: &Instance,
    arrivals: Option<&ArrivalConfig>,
    config: &OrchestratorConfig,
    mut agents: Agents,
    episodes: usize,
    seed: u64,
) -> Result<(Agents, Vec<f64>)> {
    let learning = OrchestratorConfig {
        learn: true,
        ..config.clone()
    };
    let mut rewards = Vec::with_capacity(episodes);
    for e in 0..episodes {
        let mut inst = instance.clone();
        inst.seeds = SeedBundle::new(training_seed(seed, e));
        let world = World::realize(&inst, arrivals)?;
        let (episode, trained) = run_episode(&world, &learning, PolicyKind::Perfect, agents, None)?;
        let r: Vec<f64> = episode.trace.iter().map(|f| f.training_reward).collect();
        rewards.push(mean(&r));
        agents = trained;
    }
    Ok((agents, rewards))
}

/// Starting agents of the perfect policy: the configured checkpoint or
/// fresh ones seeded from the instance.
fn initial_agents(config: &RunConfig, instance: &Instance) -> Result<Agents> {
    match &config.checkpoint {
        Some(path) => {
            let agents = Agents::load(path)?;
            if !agents.fits(instance) {
                return Err(Error::Config(format!(
                    "agents in {} do not fit the instance",
                    path.display()
                )));
            }
            Ok(agents)
        }
        None => Agents::new(instance, &config.orchestrator.agents, instance.seeds),
    }
}

struct Job {
    point: f64,
    seed: u64,
}

type JobResult = Vec<(EpisodeSummary, Vec<FrameOutcome>)>;

/// Every policy on the world of one (point, seed).
fn run_job(config: &RunConfig, job: &Job) -> Result<JobResult> {
    let (instance, arrivals) = build_instance(config, job.point, job.seed)?;
    let world = World::realize(&instance, arrivals.as_ref())?;
    let orch = &config.orchestrator;
    let oracle: Option<OracleSolution> = match OracleLimits::default().admits(&world) {
        Ok(()) => Some(oracle_solve(&world, orch.alpha, &OracleLimits::default())?),
        Err(_) => None,
    };
    let oracle_objective = oracle.as_ref().map(|s| s.report.objective_value);
    let mut out = Vec::new();
    for policy in config.policy_order() {
        let (agents, replay) = match policy {
            PolicyKind::Perfect => {
                let agents = initial_agents(config, &instance)?;
                let (agents, _) = train_agents(
                    &instance,
                    arrivals.as_ref(),
                    orch,
                    agents,
                    config.training_episodes,
                    job.seed,
                )?;
                (agents, None)
            }
            PolicyKind::Random => (Agents::new(&instance, &orch.agents, instance.seeds)?, None),
            PolicyKind::OracleReplay => {
                let solution = oracle.as_ref().ok_or_else(|| {
                    Error::Size(format!("point {} seed {} is too large for oracle replay", job.point, job.seed))
                })?;
                (
                    Agents::new(&instance, &orch.agents, instance.seeds)?,
                    Some(solution.allocation.clone()),
                )
            }
        };
        let (episode, _) = run_episode(&world, orch, policy, agents, replay)?;
        let summary = EpisodeSummary::new(job.point, policy, job.seed, &world, &episode, orch.alpha, oracle_objective);
        let trace = if config.trace { episode.trace } else { Vec::new() };
        out.push((summary, trace));
    }
    Ok(out)
}

/// Mean and spread per (point, policy), rows ordered by point then policy.
pub fn aggregate(config: &RunConfig, episodes: &[EpisodeSummary]) -> Vec<MetricsRow> {
    let mut rows = Vec::new();
    for point in config.points() {
        for policy in config.policy_order() {
            let group: Vec<&EpisodeSummary> = episodes
                .iter()
                .filter(|e| e.point == point && e.policy == policy)
                .collect();
            if group.is_empty() {
                continue;
            }
            let col = |f: fn(&EpisodeSummary) -> f64| group.iter().map(|e| f(e)).collect::<Vec<f64>>();
            let (acc, energy, latency) = (
                col(|e| e.acceptance_pct),
                col(|e| e.energy_per_request),
                col(|e| e.latency_ms),
            );
            let oracle: Option<Vec<f64>> = group.iter().map(|e| e.oracle_objective).collect();
            let oracle_ratio = oracle.and_then(|o| {
                let best = mean(&o);
                (best > 0.0).then(|| mean(&col(|e| e.objective)) / best)
            });
            rows.push(MetricsRow {
                scenario_point: point,
                policy,
                acceptance_mean: mean(&acc),
                acceptance_std: std_dev(&acc),
                energy_mean: mean(&energy),
                energy_std: std_dev(&energy),
                latency_mean: mean(&latency),
                latency_std: std_dev(&latency),
                oracle_ratio,
            });
        }
    }
    rows
}

/// Runs every sweep point × policy × seed and aggregates the results.
/// Worlds are shared across policies for a given (point, seed).
pub fn run_scenario(config: &RunConfig) -> Result<ScenarioReport> {
    config.validate()?;
    if let Some(path) = &config.instance {
        if !path.exists() {
            return Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "instance file not found"),
            ));
        }
    }
    let jobs: Vec<Job> = config
        .points()
        .into_iter()
        .flat_map(|point| config.seeds.iter().map(move |&seed| Job { point, seed }))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<JobResult> = pool.install(|| jobs.par_iter().map(|j| run_job(config, j)).collect::<Result<_>>())?;

    // Jobs come back in (point, seed) order; reorder to (point, policy, seed).
    let policies = config.policy_order();
    let seeds = config.seeds.len();
    let mut episodes = Vec::with_capacity(results.len() * policies.len());
    let mut trace = Vec::new();
    for chunk in results.chunks(seeds) {
        for k in 0..policies.len() {
            for job in chunk {
                let (summary, frames) = &job[k];
                trace.extend(frames.iter().map(|f| TraceRecord {
                    point: summary.point,
                    policy: summary.policy,
                    seed: summary.seed,
                    outcome: f.clone(),
                }));
                episodes.push(summary.clone());
            }
        }
    }
    let rows = aggregate(config, &episodes);
    Ok(ScenarioReport {
        scenario: config.scenario,
        rows,
        episodes,
        trace,
    })
}
