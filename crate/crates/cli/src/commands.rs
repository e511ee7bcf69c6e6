use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use liquidspeed::analytic::{self, EquilibriumPoint};
use liquidspeed::sim::{self, SimConfig, SimEstimate};
use liquidspeed::solver;
use liquidspeed::sweep::{self, ClaimReport};
use liquidspeed::{ModelParams, Regime};

use crate::format::{both, sig6};
use crate::settings::{Settings, DEFAULT_TRIALS};
use crate::{CommonArgs, Failure, SimulateArgs};

const LAMBDA_REL_TOL: f64 = 1e-6;
const ASK_TOL: f64 = 1e-8;
const Z_LIMIT: f64 = 4.0;

fn load(args: &CommonArgs) -> Result<Settings, Failure> {
    Ok(Settings::load(&args.config, &args.set)?)
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::usage(format!("{}: {e}", path.display()))
}

/// Sends `text` to `--out` or standard output.
fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_fail(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Failure::usage(format!("stdout: {e}")))
        }
    }
}

fn fresh_seed() -> u64 {
    use std::collections::hash_map::RandomState;
    use std::hash::BuildHasher;
    RandomState::new().hash_one(std::time::SystemTime::now())
}

fn describe_point(s: &mut String, p: &ModelParams, eq: &EquilibriumPoint) {
    let _ = writeln!(s, "[{}]", eq.regime);
    let _ = writeln!(s, "  ask (half-spread)      {}", both(eq.ask));
    let _ = writeln!(
        s,
        "  quotes                 bid {} / ask {}",
        sig6(eq.bid_absolute(p)),
        sig6(eq.ask_absolute(p))
    );
    let _ = writeln!(s, "  lambda*                {}", both(eq.lambda_star));
    let _ = writeln!(s, "  speed price            {}", both(eq.speed_price));
    let _ = writeln!(
        s,
        "  expected rental time   {}",
        both(eq.expected_rental_time)
    );
    let _ = writeln!(s, "  resource usage         {}", both(eq.resource_usage));
    let _ = writeln!(
        s,
        "  price discovery time   {}",
        both(eq.price_discovery_time)
    );
    let _ = writeln!(s, "  rent per HFT           {}", both(eq.hft_rent));
}

pub fn solve(args: &CommonArgs) -> Result<(), Failure> {
    let settings = load(args)?;
    let p = settings.params;
    let regimes = settings.regimes(args.regime.as_deref(), "regime")?;
    let cfg = settings.solver()?;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "params: delta={} mu={} sigma={} kappa={} eta={} v={}",
        p.delta, p.mu, p.sigma, p.kappa, p.eta, p.v
    );
    let mut agree = true;
    let mut summary = Vec::new();
    for &regime in &regimes {
        let eq = analytic::equilibrium_point(&p, regime)?;
        describe_point(&mut s, &p, &eq);

        let lam = solver::symmetric_equilibrium(&p, regime, &cfg);
        let ask = solver::indifference_ask(&p, regime, &cfg);
        match (lam, ask) {
            (Ok(lam), Ok(ask)) => {
                let lam_err = (lam.value - eq.lambda_star).abs() / eq.lambda_star;
                let ask_err = (ask.value - eq.ask).abs() / p.sigma;
                let foc = solver::foc_residual_fd(&p, regime, lam.value, ask.value)?;
                let ok = lam.converged && lam_err <= LAMBDA_REL_TOL && ask_err <= ASK_TOL;
                agree &= ok;
                let _ = writeln!(
                    s,
                    "  numeric lambda         {} ({} iterations, rel. error {:.2e})",
                    both(lam.value),
                    lam.iterations,
                    lam_err
                );
                let _ = writeln!(
                    s,
                    "  numeric ask            {} (error/sigma {:.2e})",
                    both(ask.value),
                    ask_err
                );
                let _ = writeln!(s, "  first-order residual   {foc:.3e}");
                let _ = writeln!(
                    s,
                    "  cross-check            {}",
                    if ok { "PASS" } else { "FAIL" }
                );
            }
            (lam, ask) => {
                agree = false;
                for e in [lam.err(), ask.err()].into_iter().flatten() {
                    let _ = writeln!(s, "  numeric solver failed: {e}");
                }
                let _ = writeln!(s, "  cross-check            FAIL");
            }
        }
        summary.push(format!(
            "λ_{}={}",
            regime.short_name().to_uppercase(),
            sig6(eq.lambda_star)
        ));
    }
    let _ = writeln!(s, "{}", summary.join(", "));
    emit(args.out.as_deref(), &s)?;
    if agree {
        Ok(())
    } else {
        Err(Failure::check(
            "numerical solver disagrees with the closed form",
        ))
    }
}

struct Gate {
    all_ok: bool,
}

impl Gate {
    fn line(&mut self, s: &mut String, name: &str, est: &SimEstimate, target: f64) {
        if est.n < 2 {
            let _ = writeln!(
                s,
                "  {name:<22} {} (n={}) target {}  std error undefined",
                sig6(est.mean),
                est.n,
                sig6(target)
            );
            return;
        }
        let z = est.z_score(target);
        let ok = z.is_some_and(|z| z.abs() <= Z_LIMIT);
        self.all_ok &= ok;
        let _ = writeln!(
            s,
            "  {name:<22} {} ± {} target {}  z={}  {}",
            sig6(est.mean),
            sig6(est.std_error),
            sig6(target),
            z.map_or_else(|| "n/a".to_string(), |z| format!("{z:+.3}")),
            if ok { "ok" } else { "OUT" }
        );
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let common = &args.common;
    let settings = load(common)?;
    let p = settings.params;
    let regimes = settings.regimes(common.regime.as_deref(), "regime")?;
    let trials = match common.trials {
        Some(n) => n,
        None => settings.cfg.get_u64("trials")?.unwrap_or(DEFAULT_TRIALS),
    };
    if trials == 0 {
        return Err(Failure::usage("trials must be at least 1"));
    }
    if args.trace.is_some() && regimes.len() != 1 {
        return Err(Failure::usage(
            "--trace needs a single regime (--regime pc or --regime od)",
        ));
    }

    let mut s = String::new();
    let seed = match settings.seed(common.seed)? {
        Some(seed) => seed,
        None => {
            let seed = fresh_seed();
            let _ = writeln!(s, "generated seed {seed}");
            seed
        }
    };
    let _ = writeln!(s, "seed {seed}, {trials} trials per regime");

    let mut gate = Gate { all_ok: true };
    for &regime in &regimes {
        let eq = analytic::equilibrium_point(&p, regime)?;
        let cfg = SimConfig::at_equilibrium(&p, regime, trials, seed)?;
        let sum = sim::simulate(&p, &cfg)?;
        let total = cfg.lambda_m + cfg.lambda_b;
        let rental = analytic::expected_rental_time(&p, regime, cfg.lambda_m, cfg.lambda_b)?;

        let _ = writeln!(
            s,
            "[{regime}] lambda={} ask={}",
            sig6(eq.lambda_star),
            sig6(eq.ask)
        );
        gate.line(
            &mut s,
            "news frequency",
            &sum.news_frequency,
            p.delta / (p.delta + p.mu),
        );
        if sum.snipe_probability.n == 0 {
            let _ = writeln!(s, "  no news-triggered trial; race statistics undefined");
        } else {
            gate.line(
                &mut s,
                "snipe probability",
                &sum.snipe_probability,
                cfg.lambda_b / total,
            );
            gate.line(&mut s, "race duration", &sum.race_duration, 1.0 / total);
        }
        gate.line(&mut s, "rental time (maker)", &sum.rental_time_m, rental);
        gate.line(&mut s, "rental time (bandit)", &sum.rental_time_b, rental);
        gate.line(&mut s, "net payoff (maker)", &sum.net_payoff_m, eq.hft_rent);
        gate.line(
            &mut s,
            "net payoff (bandit)",
            &sum.net_payoff_b,
            eq.hft_rent,
        );
        gate.line(
            &mut s,
            "resource usage",
            &sum.resource_usage,
            eq.resource_usage,
        );
    }
    let _ = writeln!(s, "overall: {}", if gate.all_ok { "PASS" } else { "FAIL" });

    if let Some(path) = &args.trace {
        let cfg = SimConfig::at_equilibrium(&p, regimes[0], trials, seed)?;
        let file = File::create(path).map_err(|e| io_fail(path, e))?;
        sim::write_trace(&p, &cfg, BufWriter::new(file))?;
    }
    emit(common.out.as_deref(), &s)?;
    if gate.all_ok {
        Ok(())
    } else {
        Err(Failure::check(format!(
            "an estimate lies more than {Z_LIMIT} standard errors from its target"
        )))
    }
}

pub fn sweep(args: &CommonArgs) -> Result<(), Failure> {
    let settings = load(args)?;
    let given = settings.seed(args.seed)?;
    let mut spec = settings.sweep_spec(args.regime.as_deref(), args.trials, given.unwrap_or(0))?;
    if spec.with_simulation && given.is_none() {
        spec.seed = fresh_seed();
        eprintln!("generated seed {}", spec.seed);
    }
    let rows = sweep::run_sweep(&spec)?;
    let mut buf = Vec::new();
    sweep::write_csv(&rows, &mut buf)?;
    emit(args.out.as_deref(), &String::from_utf8_lossy(&buf))
}

fn report_json(report: &ClaimReport) -> Result<String, Failure> {
    serde_json::to_string_pretty(report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::usage(format!("json: {e}")))
}

pub fn check(args: &CommonArgs) -> Result<(), Failure> {
    let settings = load(args)?;
    if args
        .regime
        .as_deref()
        .is_some_and(|r| !r.trim().eq_ignore_ascii_case("both"))
    {
        return Err(Failure::usage(
            "check compares both regimes; --regime must be both",
        ));
    }
    let mut spec = settings.sweep_spec(None, args.trials, args.seed.unwrap_or(0))?;
    spec.regimes = Regime::BOTH.to_vec();
    spec.with_simulation = false;
    let mut rows = sweep::run_sweep(&spec)?;

    let draws = settings.cfg.get_u64("fuzz_draws")?.unwrap_or(0);
    if draws > 0 {
        let fuzz_seed = settings.cfg.get_u64("fuzz_seed")?.unwrap_or(0);
        let points = sweep::fuzz_params(draws as usize, fuzz_seed);
        rows.extend(sweep::rows_for_points(&points)?);
    }
    let report = sweep::check_claims(&rows)?;

    print!("{}", report.render_text());
    if let Some(path) = &args.out {
        std::fs::write(path, report_json(&report)?).map_err(|e| io_fail(path, e))?;
    }
    if report.all_pass {
        Ok(())
    } else {
        Err(Failure::check(format!(
            "{} claim violation(s)",
            report.violations.len()
        )))
    }
}
