//! Exit codes and messages of the `eompc` binary.

use std::path::Path;
use std::process::{Command, Output};

use eompc::config::shipped_config_dir;

fn eompc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eompc")).args(args).env_remove("AUV_EO_CONFIG_DIR").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn suite_path() -> String {
    shipped_config_dir().join("paper_suite.toml").display().to_string()
}

#[test]
fn validate_config_accepts_the_shipped_suite() {
    let o = eompc(&["validate-config", "--config", &suite_path()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("10 run(s)"));
}

#[test]
fn config_directory_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_eompc"))
        .args(["validate-config", "--config", "paper_suite.toml"])
        .env("AUV_EO_CONFIG_DIR", shipped_config_dir())
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn missing_goal_exits_with_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(shipped_config_dir().join("paper_suite.toml")).unwrap();
    let pruned: String = text.lines().filter(|l| !l.starts_with("goal")).map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.path().join("suite.toml"), pruned).unwrap();
    std::fs::copy(shipped_config_dir().join("vehicle.toml"), dir.path().join("vehicle.toml")).unwrap();
    let cfg = dir.path().join("suite.toml").display().to_string();
    let out = dir.path().join("out").display().to_string();
    let o = eompc(&["simulate", "--config", &cfg, "--scenario", "nominal", "--out", &out]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("goal") && err.contains("scenarios[0]"), "{err}");
}

#[test]
fn bad_override_and_unknown_scenario_exit_with_2() {
    let o = eompc(&["validate-config", "--config", &suite_path(), "--set", "controllers.dc.intervals=1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("controllers.dc.intervals"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = eompc(&["simulate", "--config", &suite_path(), "--scenario", "nope", "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope"));

    let o = eompc(&["simulate", "--config", &suite_path(), "--method", "pid", "--out", &out]);
    assert_eq!(code(&o), 2);
}

#[test]
fn solver_failure_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = eompc(&[
        "simulate",
        "--config",
        &suite_path(),
        "--scenario",
        "nominal",
        "--method",
        "dc-feedforward",
        "--set",
        "controllers.dc.max_iter=1",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("nominal"));
    // The summary is still written, with the override echoed.
    let md = std::fs::read_to_string(dir.path().join("summary.md")).unwrap();
    assert!(md.contains("controllers.dc.max_iter=1"));
}

#[test]
fn existing_outputs_need_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let args = ["simulate", "--config", &suite_path(), "--scenario", "y0-plus", "--method", "los-mpc", "--out", &out];
    let o = eompc(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let files = ["summary.csv", "summary.md", "y0-plus/los-mpc/trajectory.csv", "y0-plus/los-mpc/plot_xy.csv"];
    assert!(files.iter().all(|f| Path::new(&out).join(f).exists()));

    let o = eompc(&args);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&eompc(&forced)), 0);
}

#[test]
fn cruise_speed_prints_the_optimum() {
    let o = eompc(&["cruise-speed", "--config", &suite_path()]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8_lossy(&o.stdout);
    let u: f64 = s.lines().next().unwrap().split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!((u - 0.1298).abs() < 1e-3, "{s}");
}
