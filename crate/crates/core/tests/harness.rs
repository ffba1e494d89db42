use std::path::PathBuf;

use aero_orch::harness::stats::*;
use aero_orch::harness::*;
use aero_orch::model::GeneratorConfig;
use aero_orch::orchestrator::{OrchestratorConfig, PolicyKind};
use aero_orch::Error;

/// Micro worlds over a short horizon: every point fits the oracle, so all
/// three policies can run.
fn micro_config() -> RunConfig {
    RunConfig {
        generator: GeneratorConfig::micro(),
        arrivals: None,
        policies: vec![PolicyKind::Random, PolicyKind::OracleReplay, PolicyKind::Perfect],
        seeds: vec![0],
        orchestrator: OrchestratorConfig::toy(),
        ..RunConfig::default()
    }
}

/// Toy worlds with arrivals, swept over the request rate.
fn sweep_config() -> RunConfig {
    RunConfig {
        generator: GeneratorConfig::toy(),
        seeds: vec![0, 1, 2],
        frames: Some(30),
        scenario: Scenario::RequestsSweep,
        sweep: vec![1.0, 3.0],
        orchestrator: OrchestratorConfig::toy(),
        ..RunConfig::default()
    }
}

#[test]
fn single_point_gives_one_row_per_policy() {
    let report = run_scenario(&micro_config()).unwrap();
    assert_eq!(report.rows.len(), 3);
    let policies: Vec<PolicyKind> = report.rows.iter().map(|r| r.policy).collect();
    assert_eq!(policies, vec![PolicyKind::Perfect, PolicyKind::Random, PolicyKind::OracleReplay]);
    for row in &report.rows {
        assert!((0.0..=100.0).contains(&row.acceptance_mean));
        assert_eq!(row.acceptance_std, 0.0);
        assert!(row.oracle_ratio.is_some() || report.episodes[0].oracle_objective.unwrap() <= 0.0);
    }
}

#[test]
fn oracle_replay_row_reaches_the_optimum() {
    let config = RunConfig {
        seeds: vec![0, 1, 2, 3],
        ..micro_config()
    };
    let report = run_scenario(&config).unwrap();
    for e in report.episodes.iter().filter(|e| e.policy == PolicyKind::OracleReplay) {
        assert!((e.objective - e.oracle_objective.unwrap()).abs() < 1e-9);
    }
    for e in &report.episodes {
        assert!(e.objective <= e.oracle_objective.unwrap() + 1e-9, "{e:?}");
    }
}

#[test]
fn oracle_replay_refuses_large_worlds() {
    let config = RunConfig {
        generator: GeneratorConfig::toy(),
        frames: Some(5),
        policies: vec![PolicyKind::OracleReplay],
        ..RunConfig::default()
    };
    assert!(matches!(run_scenario(&config), Err(Error::Size(_))));
}

fn sample_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[test]
fn aggregation_matches_direct_recomputation() {
    let config = sweep_config();
    let report = run_scenario(&config).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.episodes.len(), 12);
    for row in &report.rows {
        let group: Vec<&EpisodeSummary> = report
            .episodes
            .iter()
            .filter(|e| e.point == row.scenario_point && e.policy == row.policy)
            .collect();
        assert_eq!(group.len(), 3);
        let col = |f: &dyn Fn(&EpisodeSummary) -> f64| group.iter().map(|e| f(e)).collect::<Vec<f64>>();
        let acc = col(&|e| 100.0 * e.accepted as f64 / e.requests.max(1) as f64);
        let energy = col(&|e| e.energy / e.requests.max(1) as f64);
        let latency = col(&|e| e.latency_ms);
        for (values, mean, std) in [
            (&acc, row.acceptance_mean, row.acceptance_std),
            (&energy, row.energy_mean, row.energy_std),
            (&latency, row.latency_mean, row.latency_std),
        ] {
            let m = values.iter().sum::<f64>() / values.len() as f64;
            assert!((m - mean).abs() <= 1e-12 * m.abs().max(1.0), "{m} vs {mean}");
            let s = sample_std(values);
            assert!((s - std).abs() <= 1e-12 * s.max(1.0), "{s} vs {std}");
            assert!(std >= 0.0);
        }
        assert!(row.oracle_ratio.is_none());
    }
    // Rows by point, then policy.
    let keys: Vec<(f64, PolicyKind)> = report.rows.iter().map(|r| (r.scenario_point, r.policy)).collect();
    assert_eq!(
        keys,
        vec![
            (1.0, PolicyKind::Perfect),
            (1.0, PolicyKind::Random),
            (3.0, PolicyKind::Perfect),
            (3.0, PolicyKind::Random)
        ]
    );
}

#[test]
fn policies_share_each_world() {
    let config = sweep_config();
    let report = run_scenario(&config).unwrap();
    for point in config.points() {
        for &seed in &config.seeds {
            let counts: Vec<usize> = report
                .episodes
                .iter()
                .filter(|e| e.point == point && e.seed == seed)
                .map(|e| e.requests)
                .collect();
            assert_eq!(counts.len(), 2);
            assert_eq!(counts[0], counts[1]);
        }
        let world_a = build_world(&config, point, 0).unwrap();
        let world_b = build_world(&config, point, 0).unwrap();
        assert_eq!(world_a.ue_trace, world_b.ue_trace);
        assert_eq!(world_a.requests(), world_b.requests());
    }
}

#[test]
fn sweeps_change_the_intended_quantity() {
    let mut config = RunConfig::desk(Scenario::NetworkSweep);
    let (small, _) = build_instance(&config, 6.0, 0).unwrap();
    let (large, _) = build_instance(&config, 9.0, 0).unwrap();
    assert_eq!(small.nodes.len(), 6);
    assert_eq!(large.nodes.len(), 9);

    config = RunConfig::desk(Scenario::ChannelsSweep);
    let (two, arrivals) = build_instance(&config, 2.0, 0).unwrap();
    let (eight, _) = build_instance(&config, 8.0, 0).unwrap();
    assert_eq!((two.channels.len(), eight.channels.len()), (2, 8));
    assert_eq!(two.channels[..], eight.channels[..2]);
    assert_eq!(arrivals.unwrap().rate, DESK_CHANNELS_RATE);

    config = RunConfig::desk(Scenario::RequestsSweep);
    let (_, arrivals) = build_instance(&config, 6.0, 0).unwrap();
    assert_eq!(arrivals.unwrap().rate, 6.0);
}

#[test]
fn desk_presets_are_valid() {
    for s in [Scenario::RequestsSweep, Scenario::NetworkSweep, Scenario::ChannelsSweep] {
        let c = RunConfig::desk(s);
        c.validate().unwrap();
        assert!(c.seeds.len() >= 10);
        assert_eq!(c.generator.rows * c.generator.cols, 16);
        assert_eq!(c.generator.slots_per_frame, 10);
    }
    assert_eq!(RunConfig::desk(Scenario::RequestsSweep).generator.channels, 4);
}

#[test]
fn emitted_csv_has_header_and_rows() {
    let config = micro_config();
    let mut report = run_scenario(&config).unwrap();
    report.rows.truncate(1);
    let dir = tempfile::tempdir().unwrap();
    let files = emit_outputs(&report, "point", dir.path()).unwrap();
    let text = std::fs::read_to_string(&files.metrics).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "scenario_point,policy,acceptance_mean,acceptance_std,energy_mean,energy_std,latency_mean,latency_std,oracle_ratio"
    );
    assert_eq!(lines[0], METRICS_HEADER.join(","));
    assert!(lines[1].starts_with("0.0,perfect,"));
}

#[test]
fn csv_round_trip_is_exact() {
    let report = run_scenario(&sweep_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(METRICS_FILE);
    write_metrics_csv(&report.rows, &path).unwrap();
    assert_eq!(read_metrics_csv(&path).unwrap(), report.rows);

    let report = run_scenario(&micro_config()).unwrap();
    write_metrics_csv(&report.rows, &path).unwrap();
    assert_eq!(read_metrics_csv(&path).unwrap(), report.rows);
}

#[test]
fn plots_and_summary_are_written() {
    let report = run_scenario(&sweep_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_outputs(&report, Scenario::RequestsSweep.axis(), dir.path()).unwrap();
    assert_eq!(files.plots.len(), 3);
    for metric in Metric::ALL {
        let path = dir.path().join(metric.file_name());
        assert!(files.plots.contains(&path));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.len() > 100);
        assert!(text.contains("<svg"));
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files.summary).unwrap()).unwrap();
    assert_eq!(summary["scenario"], "requests-sweep");
    assert_eq!(summary["rows"].as_array().unwrap().len(), 4);
    assert_eq!(summary["episodes"].as_array().unwrap().len(), 12);
}

#[test]
fn empty_rows_are_refused() {
    let mut report = run_scenario(&micro_config()).unwrap();
    report.rows.clear();
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_outputs(&report, "point", dir.path()).is_err());
}

#[test]
fn missing_instance_reports_its_path() {
    let config = RunConfig {
        instance: Some(PathBuf::from("/nonexistent/instance.toml")),
        ..RunConfig::default()
    };
    match run_scenario(&config) {
        Err(Error::Io { path, .. }) => assert_eq!(path, PathBuf::from("/nonexistent/instance.toml")),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}

#[test]
fn unwritable_directory_is_an_io_error() {
    let report = run_scenario(&micro_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let err = emit_outputs(&report, "point", &blocker.join("out")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err}");
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        RunConfig { seeds: vec![], ..RunConfig::default() },
        RunConfig { policies: vec![], ..RunConfig::default() },
        RunConfig { scenario: Scenario::RequestsSweep, sweep: vec![], ..RunConfig::default() },
        RunConfig { scenario: Scenario::RequestsSweep, sweep: vec![2.0, 2.0], ..RunConfig::default() },
        RunConfig { scenario: Scenario::RequestsSweep, sweep: vec![3.0, 1.0], ..RunConfig::default() },
        RunConfig { scenario: Scenario::ChannelsSweep, sweep: vec![2.5], ..RunConfig::default() },
        RunConfig { scenario: Scenario::NetworkSweep, sweep: vec![0.0], ..RunConfig::default() },
        RunConfig { scenario: Scenario::RequestsSweep, sweep: vec![-1.0], ..RunConfig::default() },
        RunConfig {
            instance: Some("x.toml".into()),
            scenario: Scenario::ChannelsSweep,
            sweep: vec![2.0],
            ..RunConfig::default()
        },
    ];
    for c in bad {
        assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        assert!(run_scenario(&c).is_err());
    }
}

#[test]
fn config_file_round_trip_and_relative_paths() {
    let config = RunConfig {
        instance: Some("instances/a.toml".into()),
        checkpoint: Some("agents.json".into()),
        ..sweep_config()
    };
    let text = config.to_toml_string().unwrap();
    assert_eq!(RunConfig::from_toml_str(&text).unwrap(), config);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, &text).unwrap();
    let loaded = RunConfig::load(&path).unwrap();
    assert_eq!(loaded.instance, Some(dir.path().join("instances/a.toml")));
    assert_eq!(loaded.checkpoint, Some(dir.path().join("agents.json")));
    assert!(RunConfig::from_toml_str("unknown_key = 1").is_err());
    let minimal = RunConfig::from_toml_str("seeds = [4, 5]\nscenario = \"network-sweep\"\nsweep = [6, 8]").unwrap();
    assert_eq!(minimal.seeds, vec![4, 5]);
    assert_eq!(minimal.sweep, vec![6.0, 8.0]);
}

#[test]
fn scenario_names_parse() {
    for s in [Scenario::Single, Scenario::RequestsSweep, Scenario::NetworkSweep, Scenario::ChannelsSweep] {
        assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
    }
    assert_eq!("channels".parse::<Scenario>().unwrap(), Scenario::ChannelsSweep);
    assert!("sideways".parse::<Scenario>().is_err());
}

#[test]
fn replay_reproduces_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let config = RunConfig {
        trace: true,
        training_episodes: 1,
        ..sweep_config()
    };
    let (report, files) = run_and_emit(&config, &first).unwrap();
    let trace = first.join(TRACE_FILE);
    let (header, records) = read_run_trace(&trace).unwrap();
    assert_eq!(header.config, config);
    assert_eq!(records, report.trace);
    assert_eq!(records.len(), 2 * 2 * 3 * 30);

    let (replayed, again) = replay(&trace, &second).unwrap();
    assert_eq!(replayed.rows, report.rows);
    assert_eq!(
        std::fs::read(&files.metrics).unwrap(),
        std::fs::read(&again.metrics).unwrap()
    );
}

#[test]
fn tampered_trace_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        trace: true,
        ..sweep_config()
    };
    let (report, _) = run_and_emit(&config, dir.path()).unwrap();
    let mut records = report.trace.clone();
    records[5].outcome.rewards.tp += 1.0;
    let path = dir.path().join("tampered.ndjson");
    write_run_trace(&config, &records, &path).unwrap();
    let err = replay(&path, &dir.path().join("replay")).unwrap_err();
    assert!(matches!(err, Error::Structural(_)), "{err}");
}

#[test]
fn training_seeds_differ_from_evaluation() {
    let seeds: Vec<u64> = (0..5).map(|e| training_seed(0, e)).collect();
    let mut unique = seeds.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), 5);
    assert!(!seeds.contains(&0));
}

fn choose(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn sign_test_tail_matches_direct_sum() {
    for n in 0..=40u64 {
        for k in 0..=n {
            let direct: f64 = (k..=n).map(|j| choose(n, j)).sum::<f64>() / 2f64.powi(n as i32);
            let got = binomial_upper_tail(n as usize, k as usize);
            assert!((got - direct).abs() < 1e-9, "n {n} k {k}: {got} vs {direct}");
        }
    }
    let t = sign_test(&[3.0, 2.0, 5.0, 1.0], &[1.0, 2.0, 4.0, 0.0]);
    assert_eq!((t.wins, t.losses, t.ties), (3, 0, 1));
    assert!((t.p_value - 0.125).abs() < 1e-12);
}

#[test]
fn trend_helpers() {
    assert_eq!(inversions(&[5.0, 4.0, 4.0, 4.5, 3.0], Trend::NonIncreasing), 1);
    assert_eq!(inversions(&[1.0, 2.0, 2.0, 3.0], Trend::NonDecreasing), 0);
    assert_eq!(moving_average(&[2.0, 4.0, 6.0, 8.0], 2), vec![2.0, 3.0, 5.0, 7.0]);
    assert_eq!(mean(&[]), 0.0);
    assert_eq!(std_dev(&[1.0]), 0.0);
    assert!((std_dev(&[1.0, 2.0, 3.0, 4.0]) - sample_std(&[1.0, 2.0, 3.0, 4.0])).abs() < 1e-15);
}

#[test]
fn shipped_configs_match_presets() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["toy", "requests-sweep", "network-sweep", "channels-sweep"] {
        let shipped = RunConfig::load(dir.join(format!("{name}.toml"))).unwrap();
        assert_eq!(shipped, RunConfig::preset(name).unwrap(), "{name}");
    }
    assert!(RunConfig::preset("single").is_err());
    assert!(RunConfig::preset("huge").is_err());
}
