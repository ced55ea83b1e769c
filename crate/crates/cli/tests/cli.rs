use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use misinfo_core::scenario::ScenarioConfig;

fn misinfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_misinfo"))
        .args(args)
        .env_remove("MISINFO_OUT")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn zero_grid_distribution_is_a_single_row() {
    let out = misinfo(&["distribution", "--s-max", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "s,pmf,cdf\n0,0,0\n");
    let line = String::from_utf8(out.stderr).unwrap();
    let json: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(json["k"], 2);
    assert!((json["success_probability"].as_f64().unwrap() - 9.0 / 49.0).abs() < 1e-12);
}

#[test]
fn malformed_series_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("bad.csv");
    fs::write(&data, "t,count\n0,4\n1,5\n2,oops\n3,7\n").unwrap();
    let out = misinfo(&[
        "estimate",
        "--data",
        path(&data),
        "--iterations",
        "10",
        "--out",
        path(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn chain_length_follows_burn_in() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.csv");
    assert!(
        misinfo(&["synthesize", "--horizon", "20", "--out", path(&data)])
            .status
            .success()
    );
    let est = tmp.path().join("est");
    let out = misinfo(&[
        "estimate",
        "--data",
        path(&data),
        "--iterations",
        "100",
        "--burn-in",
        "0.75",
        "--out",
        path(&est),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let chain = fs::read_to_string(est.join("chain.csv")).unwrap();
    let mut lines = chain.lines();
    assert_eq!(lines.next(), Some("sample,beta,alpha,I0,S0,sigma_I"));
    assert_eq!(lines.count(), 25);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(est.join("summary.json")).unwrap()).unwrap();
    assert!(summary.to_string().contains("sigma_I"));
}

#[test]
fn bad_inputs_exit_with_one() {
    assert_eq!(misinfo(&["validate", "nonsense"]).status.code(), Some(1));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "[network]\nsizes = [10]\nbogus = 1\n").unwrap();
    let out = misinfo(&[
        "simulate",
        "--config",
        path(&cfg),
        "--out",
        path(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        misinfo(&["meanfield", "--p", "0.7", "--mode", "blockchain"])
            .status
            .code()
            == Some(1)
    );
    assert_eq!(misinfo(&["--help"]).status.code(), Some(0));
}

#[test]
fn written_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sim");
    let out = misinfo(&[
        "simulate",
        "--replicates",
        "1",
        "--seed",
        "3",
        "--blockchain",
        "off",
        "--out",
        path(&dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.join("config.json")).unwrap();
    let cfg: ScenarioConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg.simulation.rng_seed, 3);
    assert_eq!(cfg.simulation.replicates, 1);
    assert!(cfg.resolve().is_ok());
    assert!(dir.join("trajectory_baseline_000.csv").exists());
    assert!(!dir.join("trajectory_blockchain_000.csv").exists());

    // Re-running from the written config reproduces the trajectory.
    let again = tmp.path().join("again");
    let toml_cfg = tmp.path().join("c.cfg");
    fs::write(&toml_cfg, toml::to_string(&cfg).unwrap()).unwrap();
    let out = misinfo(&[
        "simulate",
        "--config",
        path(&toml_cfg),
        "--blockchain",
        "off",
        "--out",
        path(&again),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read(dir.join("trajectory_baseline_000.csv")).unwrap(),
        fs::read(again.join("trajectory_baseline_000.csv")).unwrap()
    );
}

#[test]
fn meanfield_is_deterministic_and_conserving() {
    let a = misinfo(&["meanfield", "--mode", "blockchain", "--horizon", "50"]);
    let b = misinfo(&["meanfield", "--mode", "blockchain", "--horizon", "50"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 51);
    let n = rows[0][1] + rows[0][2] + rows[0][3];
    for r in &rows {
        assert!((r[1] + r[2] + r[3] - n).abs() < 1e-9);
    }
}

#[test]
fn shipped_config_matches_builtin_defaults() {
    let text = include_str!("../examples/three_community.cfg");
    let cfg: ScenarioConfig = toml::from_str(text).unwrap();
    assert_eq!(cfg, ScenarioConfig::three_community());
}
