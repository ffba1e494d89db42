use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aero_orch::allocate::{check_constraints, oracle_solve, Certificate, OracleLimits};
use aero_orch::environment::World;
use aero_orch::harness::{build_instance, replay, run_and_emit, train_agents, RunConfig, Scenario};
use aero_orch::model::{Allocation, GeneratorConfig, Instance};
use aero_orch::orchestrator::{Agents, PolicyKind};
use aero_orch::{Error, Result};

#[derive(Parser)]
#[command(name = "aero-orch", version, about = "UAV-assisted edge orchestration simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write metrics.csv, summary.json and plots.
    Run(RunArgs),
    /// Solve a micro instance exactly and write its certificate.
    Oracle(OracleArgs),
    /// Check an allocation against an instance.
    Check(CheckArgs),
    /// Train the learning agents and save them.
    Train(TrainArgs),
    /// Re-run a saved trace and verify every frame.
    Replay(ReplayArgs),
    /// Print a complete run configuration: toy, requests-sweep,
    /// network-sweep or channels-sweep.
    Preset { name: String },
}

#[derive(Args)]
struct Overrides {
    /// Run only this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Policies to compare; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    policy: Vec<PolicyKind>,
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Horizon in frames.
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Also write every frame outcome to trace.ndjson.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Instance file; without it a micro instance is generated from --seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Weight of energy in the objective.
    #[arg(long, default_value_t = aero_orch::allocate::DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Args)]
struct CheckArgs {
    /// Instance file.
    #[arg(long)]
    config: PathBuf,
    /// Certificate or bare allocation (TOML).
    #[arg(long)]
    allocation: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Run configuration (TOML); training uses its first sweep point.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Training episodes; defaults to the configuration's count, or 10.
    #[arg(long)]
    episodes: Option<usize>,
}

#[derive(Args)]
struct ReplayArgs {
    trace: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load_config(path: &Path, o: &Overrides) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = o.seed {
        config.seeds = vec![seed];
    }
    if let Some(out) = &o.out {
        config.out = out.clone();
    }
    if !o.policy.is_empty() {
        config.policies = o.policy.clone();
    }
    if let Some(s) = o.scenario {
        config.scenario = s;
    }
    if let Some(f) = o.frames {
        config.frames = Some(f);
    }
    config.validate()?;
    Ok(config)
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = load_config(&args.config, &args.overrides)?;
    config.trace |= args.trace;
    let out = config.out.clone();
    let (report, files) = run_and_emit(&config, &out)?;
    println!("{:>8} {:<13} {:>12} {:>14} {:>12}", "point", "policy", "accepted %", "energy/req J", "latency ms");
    for r in &report.rows {
        println!(
            "{:>8} {:<13} {:>6.2}±{:<5.2} {:>14.1} {:>12.1}",
            r.scenario_point, r.policy, r.acceptance_mean, r.acceptance_std, r.energy_mean, r.latency_mean
        );
    }
    println!("wrote {}", files.metrics.display());
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<()> {
    let instance = match &args.config {
        Some(path) => Instance::load(path)?,
        None => GeneratorConfig::micro().generate(args.seed)?,
    };
    let world = World::realize(&instance, None)?;
    let solution = oracle_solve(&world, args.alpha, &OracleLimits::default())?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    if args.config.is_none() {
        instance.save(args.out.join("instance.toml"))?;
    }
    let report = solution.report.clone();
    let path = args.out.join("certificate.toml");
    Certificate::from(solution).save(&path)?;
    println!(
        "objective {:.6} with {} accepted, energy {:.3} J",
        report.objective_value, report.accepted_count, report.total_energy
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn load_allocation(path: &Path) -> Result<Allocation> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    if let Ok(cert) = Certificate::from_toml_str(&text) {
        return Ok(cert.allocation);
    }
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Returns the number of violations.
fn check(args: CheckArgs) -> Result<usize> {
    let instance = Instance::load(&args.config)?;
    let allocation = load_allocation(&args.allocation)?;
    let world = World::realize(&instance, None)?;
    let violations = check_constraints(&allocation, &world)?;
    for v in &violations {
        println!("{v}");
    }
    println!("{} violations", violations.len());
    Ok(violations.len())
}

fn train(args: TrainArgs) -> Result<()> {
    let config = load_config(&args.config, &args.overrides)?;
    let episodes = args.episodes.unwrap_or(match config.training_episodes {
        0 => 10,
        n => n,
    });
    let point = config.points()[0];
    let seed = config.seeds[0];
    let (instance, arrivals) = build_instance(&config, point, seed)?;
    let agents = match &config.checkpoint {
        Some(path) => Agents::load(path)?,
        None => Agents::new(&instance, &config.orchestrator.agents, instance.seeds)?,
    };
    let (agents, rewards) = train_agents(&instance, arrivals.as_ref(), &config.orchestrator, agents, episodes, seed)?;
    std::fs::create_dir_all(&config.out).map_err(|e| io_error(&config.out, e))?;
    let path = config.out.join("agents.json");
    agents.save(&path)?;
    for (e, r) in rewards.iter().enumerate() {
        println!("episode {e:>4} mean reward {r:>10.4}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::Oracle(a) => oracle(a).map(|_| true),
        Command::Check(a) => check(a).map(|n| n == 0),
        Command::Train(a) => train(a).map(|_| true),
        Command::Preset { name } => RunConfig::preset(&name)
            .and_then(|c| c.to_toml_string())
            .map(|text| {
                print!("{text}");
                true
            }),
        Command::Replay(a) => replay(&a.trace, &a.out).map(|(_, files)| {
            println!("replay matched; wrote {}", files.metrics.display());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
