use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use stepanov_core::fixedpoint::IterationReport;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stepanov"));
    c.env_remove("STEPANOV_THREADS");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn constants_match_golden_table() {
    let o = run(&["constants", "--gamma", "0.6,0.75,0.9", "--p", "2,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = include_str!("golden/constants.csv");
    assert_eq!(stdout(&o), golden);
}

#[test]
fn divergent_constant_exits_with_config_code() {
    let o = run(&["constants", "--gamma", "0.5", "--p", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("diverges"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&[]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "p = 2.0\n[kernel]\ngamma = 0.75\nmodes = [8\n");
    let o = run(&["solve-frac", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let unknown = write(dir.path(), "unknown.toml", "p = 2.0\n[kernel]\ngamma = 0.75\nmodez = 8\n");
    let o = run(&["solve-frac", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 4") && err.contains("modez"), "{err}");
}

#[test]
fn config_only_command_needs_config() {
    let o = run(&["solve-frac"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--config"), "{}", stderr(&o));
}

#[test]
fn refused_hypothesis_exits_2_with_margin() {
    let o = run(&["solve-frac", "--config", scenario("frac_refused.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("refused") && err.contains("margin: -0.05"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn empty_table_prints_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ml.toml", "alpha = 0.5\nz = []\n");
    let o = run(&["ml", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "alpha,beta,z,value\n");
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ml.toml", "alpha = 0.5\nz = [1.0]\n");
    let o = run(&["ml", "--config", cfg.to_str().unwrap(), "--z", "-1,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0.5,1,-1,"));
    assert_eq!(rows[1], "0.5,1,0,1");
}

#[test]
fn norm_of_sine_wave() {
    let o = run(&["norm", "--signal", "sine:1,6.283185307179586", "--p", "1", "--window", "-3,5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let norm: f64 = row[4].parse().unwrap();
    assert!((norm - 2.0 / std::f64::consts::PI).abs() < 1e-10, "{norm}");
}

#[test]
fn probe_separates_maps() {
    let o = run(&["probe", "--map", "saturating", "--range", "-3,3", "--grid", "31"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",true")));
    let o = run(&["probe", "--map", "linear:2", "--range", "-3,3", "--grid", "31"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn solver_output_is_deterministic() {
    let cfg = scenario("heat.toml");
    let a = run(&["heat", "--config", cfg.to_str().unwrap()]);
    let b = bin()
        .args(["heat", "--config", cfg.to_str().unwrap()])
        .env("STEPANOV_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let o = bin().args(["ml", "--alpha", "0.5", "--z", "1"]).env("STEPANOV_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("STEPANOV_THREADS"));
}

#[test]
fn report_round_trips_iteration_history() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    let json = dir.path().join("report.json");
    let o = run(&[
        "solve-evo",
        "--config",
        scenario("evo_quadratic.toml").to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--report",
        json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let it: IterationReport = serde_json::from_value(report["report"].clone()).unwrap();
    assert!(it.converged);
    assert_eq!(it.residuals.len(), it.iterations);
    assert!(it.final_residual <= it.tolerance);
    assert!(report["max_iterate_norm"].as_f64().unwrap() <= 0.4);

    // Quadratic root of 0.2 u² − 2u + 0.1 = 0.
    let root = (2.0 - (4.0f64 - 0.08).sqrt()) / 0.4;
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,u1"));
    for line in text.lines().skip(1) {
        let u: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((u - root).abs() < 1e-9, "{u} vs {root}");
    }
}

#[test]
fn fractional_scenario_converges() {
    let o = run(&["solve-frac", "--config", scenario("frac_saturating.toml").to_str().unwrap(), "--report", "-"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let start = text.find('{').unwrap();
    let report: Value = serde_json::from_str(&text[start..]).unwrap();
    assert_eq!(report["report"]["converged"], Value::Bool(true));
    assert_eq!(report["constants"]["route"], Value::String("banach".into()));
    assert_eq!(text[..start].lines().next().unwrap(), "t,u1,u2,u3,u4,u5,u6,u7,u8");
}

#[test]
fn lotka_scenario_stays_in_ball() {
    let o = run(&["lotka", "--config", scenario("lotka.toml").to_str().unwrap(), "--report", "-"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let report: Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert!(report["max_iterate_norm"].as_f64().unwrap() <= 0.5);
    assert_eq!(report["report"]["converged"], Value::Bool(true));
}

#[test]
fn ergodic_scenario_decays() {
    let o = run(&["ergodic", "--config", scenario("ergodic.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let means: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(means.len(), 3);
    assert!(means.windows(2).all(|w| w[1] < w[0]));
    assert!((means[0] - 0.414831328097).abs() < 1e-9);
}

#[test]
fn compose_scenario_is_nonincreasing() {
    let o = run(&["compose-check", "--config", scenario("compose.toml").to_str().unwrap(), "--report", "-"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let report: Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert_eq!(report["nonincreasing"], Value::Bool(true));
}
