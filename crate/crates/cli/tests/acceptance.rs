//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use liquidspeed::analytic::{self, equilibrium_point};
use liquidspeed::sim::{simulate, SimConfig, SimEstimate};
use liquidspeed::solver::{indifference_ask, symmetric_equilibrium_from, SolverConfig};
use liquidspeed::sweep::{curve_shape, parse_grid, run_sweep, SweepSpec};
use liquidspeed::{ModelParams, ParamKey, Regime};

struct Verdict {
    ok: bool,
    notes: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            ok: true,
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, note: impl Into<String>) {
        if !ok {
            self.ok = false;
            self.notes.push(note.into());
        }
    }
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liquidspeed"))
        .args(args)
        .env_remove("LIQUIDSPEED_THREADS")
        .output()
        .expect("run liquidspeed")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn closed_forms(v: &mut Verdict) {
    let p = ModelParams::reference(2.0).unwrap();
    let pc = equilibrium_point(&p, Regime::PreCommitment).unwrap();
    let od = equilibrium_point(&p, Regime::OnDemand).unwrap();
    let expected = [
        ("ask pc", pc.ask, 0.5),
        ("ask od", od.ask, 0.5),
        ("lambda pc", pc.lambda_star, 1.0 / 3.0),
        ("lambda od", od.lambda_star, 0.5),
        ("usage pc", pc.resource_usage, 2.0 / 3.0),
        ("usage od", od.resource_usage, 0.5),
        ("rent pc", pc.hft_rent, 5.0 / 72.0),
        ("rent od", od.hft_rent, 1.0 / 16.0),
        ("discovery pc", pc.price_discovery_time, 1.5),
        ("discovery od", od.price_discovery_time, 1.0),
    ];
    for (name, got, want) in expected {
        v.expect(rel(got, want) <= 1e-12, format!("{name}: {got} vs {want}"));
    }
}

fn solver_grid(v: &mut Verdict) {
    let cfg = SolverConfig::default();
    let starts = [0.01, 0.1, 1.0, 10.0];
    let mut points = 0;
    for d in [0.5, 1.0, 2.0, 4.0, 8.0] {
        for m in [0.5, 1.0, 2.0, 4.0, 8.0] {
            for s in [0.5, 1.0, 2.0] {
                for k in [0.1, 0.25, 1.0] {
                    points += 1;
                    let p = ModelParams::new(d, m, s, k).unwrap();
                    for regime in Regime::BOTH {
                        let closed = analytic::lambda_star(&p, regime);
                        for l0 in starts {
                            match symmetric_equilibrium_from(&p, regime, l0, &cfg) {
                                Ok(r) => v.expect(
                                    rel(r.value, closed) <= 1e-6,
                                    format!(
                                        "{regime} lambda at {p:?} from {l0}: {} vs {closed}",
                                        r.value
                                    ),
                                ),
                                Err(e) => {
                                    v.expect(false, format!("{regime} at {p:?} from {l0}: {e}"))
                                }
                            }
                        }
                        let target = d * s / (d + m);
                        match indifference_ask(&p, regime, &cfg) {
                            Ok(r) => v.expect(
                                (r.value - target).abs() <= 1e-8 * s,
                                format!("{regime} ask at {p:?}: {} vs {target}", r.value),
                            ),
                            Err(e) => v.expect(false, format!("{regime} ask at {p:?}: {e}")),
                        }
                    }
                }
            }
        }
    }
    v.expect(points == 225, format!("grid has {points} points"));
}

fn monte_carlo(v: &mut Verdict) {
    let p = ModelParams::reference(2.0).unwrap();
    for (regime, seed) in [(Regime::PreCommitment, 2024), (Regime::OnDemand, 2025)] {
        let eq = equilibrium_point(&p, regime).unwrap();
        let s = simulate(
            &p,
            &SimConfig::at_equilibrium(&p, regime, 1_000_000, seed).unwrap(),
        )
        .unwrap();
        let checks: [(&str, SimEstimate, f64); 6] = [
            ("rental time", s.rental_time_m, eq.expected_rental_time),
            ("snipe probability", s.snipe_probability, 0.5),
            ("maker net rent", s.net_payoff_m, eq.hft_rent),
            ("bandit net rent", s.net_payoff_b, eq.hft_rent),
            ("resource usage", s.resource_usage, eq.resource_usage),
            ("race duration", s.race_duration, eq.price_discovery_time),
        ];
        for (name, est, target) in checks {
            let z = est.z_score(target);
            v.expect(
                z.is_some_and(|z| z.abs() <= 4.0),
                format!("{regime} {name}: {} target {target} z {z:?}", est.mean),
            );
        }
    }
    let pc = equilibrium_point(&p, Regime::PreCommitment).unwrap();
    v.expect(pc.expected_rental_time == 1.0, "pc rental target is not 1");
}

fn claims(v: &mut Verdict) {
    let out_dir = tempfile::tempdir().unwrap();
    let json = out_dir.path().join("report.json");
    let cfg = configs().join("check.cfg");
    let out = cli(&[
        "check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        json.to_str().unwrap(),
    ]);
    v.expect(
        out.status.code() == Some(0),
        format!("check exited {:?}", out.status.code()),
    );
    let text = String::from_utf8_lossy(&out.stdout);
    v.expect(
        text.contains("claim check over 232 grid points"),
        "expected 32 sweep points plus 200 draws",
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&json).unwrap_or_default()).unwrap_or_default();
    v.expect(
        report["all_pass"] == serde_json::Value::Bool(true),
        "json report not all_pass",
    );
    v.expect(
        report["claims"].as_object().is_some_and(|c| c.len() == 6),
        "json report lacks six claims",
    );
}

fn curve_shapes(v: &mut Verdict) {
    let spec = SweepSpec::analytic(
        ModelParams::reference(2.0).unwrap(),
        ParamKey::Delta,
        parse_grid("0.1:10:32").unwrap(),
    );
    let rows = run_sweep(&spec).unwrap();
    let shape = curve_shape(&rows);
    let lam = liquidspeed::sweep::column(&rows, Regime::PreCommitment, |r| r.lambda_star);
    let (peak, _) =
        lam.iter().enumerate().fold(
            (0, f64::MIN),
            |best, (i, &l)| if l > best.1 { (i, l) } else { best },
        );
    v.expect(
        shape.lambda_pc_increasing,
        format!(
            "lambda_pc not strictly increasing in delta: rises from {:.6} to {:.6} at delta={:.4}, falls to {:.6} at delta=10",
            lam[0],
            lam[peak],
            spec.grid[peak],
            lam[lam.len() - 1]
        ),
    );
    v.expect(
        shape.lambda_od_decreasing,
        "lambda_od not strictly decreasing in delta",
    );
    v.expect(shape.discovery_od_below_pc, "discovery od not below pc");
    v.expect(
        shape.resource_pc_increasing,
        "resource usage pc not increasing",
    );
    v.expect(
        shape.resource_od_increasing,
        "resource usage od not increasing",
    );
    v.expect(shape.resource_pc_above_od, "resource usage pc not above od");
    v.expect(shape.rent_pc_above_od, "rent pc not above od");
}

fn determinism(v: &mut Verdict) {
    let cfg = configs().join("reference.cfg");
    let cfg = cfg.to_str().unwrap();
    let args = [
        "simulate", "--config", cfg, "--trials", "200000", "--seed", "99",
    ];
    let a = cli(&args);
    let b = cli(&args);
    v.expect(
        a.status.code() == Some(0),
        format!("simulate exited {:?}", a.status.code()),
    );
    v.expect(
        !a.stdout.is_empty() && a.stdout == b.stdout,
        "simulate output differs between runs",
    );

    let p = ModelParams::reference(2.0).unwrap();
    for regime in Regime::BOTH {
        let x = simulate(
            &p,
            &SimConfig::at_equilibrium(&p, regime, 1_000_000, 11).unwrap(),
        )
        .unwrap();
        let y = simulate(
            &p,
            &SimConfig::at_equilibrium(&p, regime, 1_000_000, 12).unwrap(),
        )
        .unwrap();
        for (name, e1, e2) in [
            ("rental", x.rental_time_m, y.rental_time_m),
            ("maker net", x.net_payoff_m, y.net_payoff_m),
            ("bandit net", x.net_payoff_b, y.net_payoff_b),
            ("usage", x.resource_usage, y.resource_usage),
            ("race", x.race_duration, y.race_duration),
        ] {
            let se = e1.std_error.hypot(e2.std_error);
            v.expect(
                (e1.mean - e2.mean).abs() <= 4.0 * se,
                format!("{regime} {name}: {} vs {}", e1.mean, e2.mean),
            );
        }
    }
}

fn main() {
    type Criterion = (u32, &'static str, u64, fn(&mut Verdict));
    let criteria: [Criterion; 6] = [
        (
            1,
            "closed forms at the reference point, 1e-12 relative",
            1,
            closed_forms,
        ),
        (
            2,
            "solver matches closed forms on the 225-point grid from 4 starts",
            30,
            solver_grid,
        ),
        (
            3,
            "Monte Carlo within 4 standard errors at n = 1e6",
            60,
            monte_carlo,
        ),
        (
            4,
            "check passes on the delta sweep plus 200 random draws",
            10,
            claims,
        ),
        (5, "delta-sweep curve shapes", 0, curve_shapes),
        (
            6,
            "simulate is byte-identical per seed; disjoint seeds agree",
            0,
            determinism,
        ),
    ];

    let mut failed = 0;
    for (id, title, limit_s, run) in criteria {
        let mut v = Verdict::new();
        let start = Instant::now();
        run(&mut v);
        let elapsed = start.elapsed();
        if limit_s > 0 && elapsed > Duration::from_secs(limit_s) {
            v.expect(false, format!("took {elapsed:.2?}, limit {limit_s} s"));
        }
        println!(
            "criterion {id}: {} - {title} ({elapsed:.2?})",
            if v.ok { "PASS" } else { "FAIL" }
        );
        for note in v.notes.iter().take(10) {
            println!("    {note}");
        }
        if v.notes.len() > 10 {
            println!("    ... {} more", v.notes.len() - 10);
        }
        if !v.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 6 criteria passed", 6 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
