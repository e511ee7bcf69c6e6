use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liquidspeed"))
        .args(args)
        .env_remove("LIQUIDSPEED_THREADS")
        .output()
        .unwrap()
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn reference() -> String {
    configs()
        .join("reference.cfg")
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn solve_reports_both_intensities() {
    let o = run(&["solve", "--config", &reference()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("λ_PC=0.333333, λ_OD=0.500000"));
}

#[test]
fn override_replaces_config_value() {
    let o = run(&["solve", "--config", &reference(), "--set", "delta=1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("delta=1 "));
    assert!(out.contains("λ_PC=0.333333"));
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "delta = 2\nmu 2\n");
    let o = run(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn missing_and_invalid_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "a.cfg", "delta = 2\nmu = 2\nsigma = 1\n");
    let o = run(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kappa"));

    let o = run(&["solve", "--config", &reference(), "--set", "kappa=-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", "--config", &reference(), "--set", "sigma=nan"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_key_exits_2() {
    let o = run(&["solve", "--config", &reference(), "--set", "gamma=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma"));
}

#[test]
fn empty_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "g.cfg",
        "delta=2\nmu=2\nsigma=1\nkappa=0.25\ngrid =\n",
    );
    let o = run(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("grid must be nonempty"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn bad_thread_count_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_liquidspeed"))
        .args(["solve", "--config", &reference()])
        .env("LIQUIDSPEED_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_simulate_output() {
    let args = [
        "simulate",
        "--config",
        &reference(),
        "--trials",
        "50000",
        "--seed",
        "4",
    ];
    let single = Command::new(env!("CARGO_BIN_EXE_liquidspeed"))
        .args(args)
        .env("LIQUIDSPEED_THREADS", "1")
        .output()
        .unwrap();
    let auto = run(&args);
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(single.stdout, auto.stdout);
}

#[test]
fn sweep_writes_64_rows_for_32_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let cfg = configs().join("delta_sweep.cfg");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 65);
    let rows = liquidspeed::sweep::read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 64);
}

#[test]
fn sweep_with_simulation_fills_estimates() {
    let o = run(&[
        "sweep",
        "--config",
        &reference(),
        "--set",
        "grid=1,2",
        "--set",
        "with_simulation=true",
        "--trials",
        "20000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = liquidspeed::sweep::read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r.n_trials == Some(20000) && r.sim_rent_se.is_some()));
}

#[test]
fn simulate_single_trial_has_no_gate() {
    let o = run(&[
        "simulate",
        "--config",
        &reference(),
        "--trials",
        "1",
        "--regime",
        "od",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("std error undefined"));
}

#[test]
fn simulate_without_seed_prints_generated_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "s.cfg", "delta=2\nmu=2\nsigma=1\nkappa=0.25\n");
    let o = run(&["simulate", "--config", &cfg, "--trials", "1000"]);
    let out = stdout(&o);
    let seed: u64 = out
        .lines()
        .find_map(|l| l.strip_prefix("generated seed "))
        .expect("generated seed line")
        .parse()
        .unwrap();
    let again = run(&[
        "simulate",
        "--config",
        &cfg,
        "--trials",
        "1000",
        "--seed",
        &seed.to_string(),
    ]);
    assert_eq!(
        stdout(&again),
        out.lines()
            .skip(1)
            .map(|l| format!("{l}\n"))
            .collect::<String>()
    );
}

#[test]
fn trace_requires_single_regime() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let o = run(&[
        "simulate",
        "--config",
        &reference(),
        "--trials",
        "10",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "simulate",
        "--config",
        &reference(),
        "--trials",
        "10",
        "--regime",
        "pc",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 11);
}

#[test]
fn loose_solver_tolerance_fails_cross_check_with_exit_1() {
    let o = run(&["solve", "--config", &reference(), "--set", "tol=0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("cross-check            FAIL"));
}

#[test]
fn check_rejects_single_regime() {
    let cfg = configs().join("check.cfg");
    let o = run(&["check", "--config", cfg.to_str().unwrap(), "--regime", "pc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--config", "/nonexistent/x.cfg"])
            .status
            .code(),
        Some(2)
    );
}
