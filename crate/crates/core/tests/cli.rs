use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn aero(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aero-orch"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn toy_config() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/toy.toml")
        .display()
        .to_string()
}

#[test]
fn run_without_config_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = aero(&["run"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("--config"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = aero(&["run", "--config", "x.toml", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).to_lowercase().contains("usage"));
}

#[test]
fn missing_config_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = aero(&["run", "--config", "nowhere.toml"], dir.path());
    assert!(!out.status.success());
    let err = text(&out.stderr);
    assert!(err.starts_with("error:") && err.contains("nowhere.toml"), "{err}");
}

#[test]
fn malformed_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "seeds = \"many\"\n").unwrap();
    let out = aero(&["run", "--config", "bad.toml"], dir.path());
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("bad.toml"));
}

#[test]
fn oracle_certificate_passes_the_checker() {
    let dir = tempfile::tempdir().unwrap();
    let out = aero(&["oracle", "--seed", "3", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("objective"));
    let out = aero(
        &["check", "--config", "o/instance.toml", "--allocation", "o/certificate.toml"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stdout));
    assert!(text(&out.stdout).contains("0 violations"));
}

#[test]
fn check_flags_a_broken_allocation() {
    let dir = tempfile::tempdir().unwrap();
    assert!(aero(&["oracle", "--seed", "0", "--out", "o"], dir.path()).status.success());
    // Request 0 on two channels in one slot.
    let cert = std::fs::read_to_string(dir.path().join("o/certificate.toml")).unwrap();
    let mut value: toml::Value = toml::from_str(&cert).unwrap();
    let allocation = value.get_mut("allocation").unwrap().as_table_mut().unwrap();
    let block = |c: i64| toml::Value::Array(vec![0.into(), 0.into(), 0.into(), c.into()]);
    allocation.insert("z_channel".into(), toml::Value::Array(vec![block(0), block(1)]));
    std::fs::write(dir.path().join("broken.toml"), toml::to_string(&value).unwrap()).unwrap();
    let out = aero(&["check", "--config", "o/instance.toml", "--allocation", "broken.toml"], dir.path());
    let stdout = text(&out.stdout);
    assert!(!out.status.success(), "{stdout}{}", text(&out.stderr));
    assert!(stdout.contains("C3"), "{stdout}");
}

#[test]
fn preset_prints_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = aero(&["preset", "network-sweep"], dir.path());
    assert!(out.status.success());
    assert!(text(&out.stdout).contains("scenario = \"network-sweep\""));
    assert!(!aero(&["preset", "single"], dir.path()).status.success());
}

#[test]
fn run_trace_and_replay_agree() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config();
    let out = aero(
        &["run", "--config", &config, "--seed", "1", "--frames", "40", "--out", "a", "--trace"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("perfect"));
    for f in ["metrics.csv", "summary.json", "trace.ndjson"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
    let out = aero(&["replay", "a/trace.ndjson", "--out", "b"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let a = std::fs::read(dir.path().join("a/metrics.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/metrics.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn train_writes_agents() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config();
    let out = aero(
        &["train", "--config", &config, "--frames", "30", "--episodes", "2", "--out", "t"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout).matches("mean reward").count(), 2);
    assert!(dir.path().join("t/agents.json").exists());
}
