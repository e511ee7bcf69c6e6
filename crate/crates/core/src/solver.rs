//! Numerical equilibrium solver.
//!
//! Works only from the payoff functions: the equilibrium ask comes from
//! root-finding the maker/bandit indifference condition, and speed
//! intensities from best-response maximization iterated to a symmetric
//! fixed point. No closed-form equilibrium expression is used, so results
//! here are an independent check on [`crate::analytic`].

use serde::{Deserialize, Serialize};

use crate::analytic::{
    payoff_bandit_od, payoff_bandit_pc, payoff_maker_od, payoff_market_maker_pc,
};
use crate::error::{Error, Result};
use crate::params::{ModelParams, Regime};
use crate::search::{bisect, maximize_unimodal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative convergence tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Weight on the new best response in the damped fixed-point update.
    pub damping: f64,
    /// Initial upper bound for the intensity search; `None` means 10σ/κ.
    /// The bound is doubled automatically when needed.
    pub bracket_hi: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iters: 10_000,
            damping: 0.5,
            bracket_hi: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(self) -> Result<Self> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::invalid("tol must lie in (0, 1)"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("damping must lie in (0, 1]"));
        }
        if let Some(hi) = self.bracket_hi {
            if !(hi.is_finite() && hi > 0.0) {
                return Err(Error::invalid("bracket_hi must be positive"));
            }
        }
        Ok(self)
    }

    fn lambda_hi(&self, p: &ModelParams) -> f64 {
        self.bracket_hi.unwrap_or(10.0 * p.sigma / p.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Solved intensity or ask.
    pub value: f64,
    pub iterations: usize,
    /// Last step size relative to 1 + |value|.
    pub residual: f64,
    pub converged: bool,
}

/// Ex-ante payoff of an HFT before the quoting race with speed pre-committed:
/// it becomes the maker with probability λ_i/(λ_i+λ_{-i}), otherwise the
/// bandit. Both role payoffs already carry the expected rental cost.
fn pc_ex_ante_payoff(p: &ModelParams, ask: f64, lambda_i: f64, lambda_other: f64) -> f64 {
    let total = lambda_i + lambda_other;
    if total <= 0.0 {
        return 0.0;
    }
    let maker = payoff_market_maker_pc(p, ask, lambda_i, lambda_other);
    let bandit = payoff_bandit_pc(p, ask, lambda_i, lambda_other);
    match (maker, bandit) {
        (Ok(m), Ok(b)) => (lambda_i * m + lambda_other * b) / total,
        _ => f64::NAN,
    }
}

// Conditional-on-news race payoffs, extended by continuity to the case where
// neither side rents anything.
fn od_bandit(p: &ModelParams, ask: f64, lambda_b: f64, lambda_m: f64) -> f64 {
    if lambda_b + lambda_m <= 0.0 {
        return 0.0;
    }
    payoff_bandit_od(p, ask, lambda_b, lambda_m).unwrap_or(f64::NAN)
}

fn od_maker(p: &ModelParams, ask: f64, lambda_m: f64, lambda_b: f64) -> f64 {
    if lambda_b + lambda_m <= 0.0 {
        return 0.0;
    }
    payoff_maker_od(p, ask, lambda_m, lambda_b).unwrap_or(f64::NAN)
}

fn check_lambda(lambda: f64, what: &str) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!(
            "{what} must be positive, got {lambda}"
        )));
    }
    Ok(())
}

fn pc_best_response_at(
    p: &ModelParams,
    ask: f64,
    lambda_other: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let m = maximize_unimodal(
        |l| pc_ex_ante_payoff(p, ask, l, lambda_other),
        cfg.lambda_hi(p),
        cfg.max_iters,
        "best_response_pc",
    )?;
    Ok(SolveResult {
        value: m.x,
        iterations: m.iterations,
        residual: m.width,
        converged: true,
    })
}

/// Best response in own intensity to an opponent intensity, with speed
/// pre-committed and the ask set by the numerically solved indifference
/// condition.
pub fn best_response_pc(
    p: &ModelParams,
    lambda_other: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let p = p.validate()?;
    let cfg = cfg.validate()?;
    check_lambda(lambda_other, "lambda_other")?;
    let ask = indifference_ask(&p, Regime::PreCommitment, &cfg)?.value;
    pc_best_response_at(&p, ask, lambda_other, &cfg)
}

/// Damped best-response iteration to the symmetric pre-commitment
/// equilibrium, starting from σ/(4κ).
pub fn symmetric_equilibrium_pc(p: &ModelParams, cfg: &SolverConfig) -> Result<SolveResult> {
    symmetric_equilibrium_pc_from(p, p.sigma / (4.0 * p.kappa), cfg)
}

pub fn symmetric_equilibrium_pc_from(
    p: &ModelParams,
    lambda0: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let p = p.validate()?;
    let cfg = cfg.validate()?;
    check_lambda(lambda0, "initial lambda")?;
    let ask = indifference_ask(&p, Regime::PreCommitment, &cfg)?.value;
    let d = cfg.damping;
    let mut lambda = lambda0;
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_iters {
        let br = pc_best_response_at(&p, ask, lambda, &cfg)?.value;
        let next = (1.0 - d) * lambda + d * br;
        let step = (next - lambda).abs();
        residual = step / (1.0 + next.abs());
        lambda = next;
        if step <= cfg.tol * lambda.abs() {
            // report the mutual best response at the converged profile
            let value = pc_best_response_at(&p, ask, lambda, &cfg)?.value;
            return Ok(SolveResult {
                value,
                iterations: iter,
                residual,
                converged: true,
            });
        }
    }
    Err(Error::NoConvergence {
        context: "symmetric_equilibrium_pc",
        iterations: cfg.max_iters,
        residual,
    })
}

/// Race-stage equilibrium after news with on-demand speed: alternating
/// damped best responses of bandit and maker until both settle.
pub fn race_stage_od(p: &ModelParams, ask: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    race_stage_od_from(p, ask, p.sigma / (4.0 * p.kappa), cfg)
}

pub fn race_stage_od_from(
    p: &ModelParams,
    ask: f64,
    lambda0: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let p = p.validate()?;
    let cfg = cfg.validate()?;
    check_lambda(lambda0, "initial lambda")?;
    if !(ask >= 0.0 && ask < p.sigma) {
        return Err(Error::invalid(format!(
            "ask must lie in [0, sigma) for a profitable race, got {ask}"
        )));
    }
    race_stage_unchecked(&p, ask, lambda0, &cfg)
}

fn race_stage_unchecked(
    p: &ModelParams,
    ask: f64,
    lambda0: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let hi = cfg.lambda_hi(p);
    let bandit_br = |lambda_m: f64| {
        maximize_unimodal(
            |l| od_bandit(p, ask, l, lambda_m),
            hi,
            cfg.max_iters,
            "race_stage_od",
        )
        .map(|m| m.x)
    };
    let maker_br = |lambda_b: f64| {
        maximize_unimodal(
            |l| od_maker(p, ask, l, lambda_b),
            hi,
            cfg.max_iters,
            "race_stage_od",
        )
        .map(|m| m.x)
    };

    let d = cfg.damping;
    let (mut lb, mut lm) = (lambda0, lambda0);
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_iters {
        let nb = (1.0 - d) * lb + d * bandit_br(lm)?;
        let nm = (1.0 - d) * lm + d * maker_br(nb)?;
        let (sb, sm) = ((nb - lb).abs(), (nm - lm).abs());
        residual = (sb / (1.0 + nb)).max(sm / (1.0 + nm));
        lb = nb;
        lm = nm;
        if sb <= cfg.tol * lb && sm <= cfg.tol * lm {
            let value = 0.5 * (bandit_br(lm)? + maker_br(lb)?);
            return Ok(SolveResult {
                value,
                iterations: iter,
                residual,
                converged: true,
            });
        }
    }
    Err(Error::NoConvergence {
        context: "race_stage_od",
        iterations: cfg.max_iters,
        residual,
    })
}

/// Ask at which becoming the maker and becoming the bandit pay the same.
///
/// With pre-committed speed the intensities are held at σ/(4κ) (any positive
/// symmetric value gives the same root). With on-demand speed they are
/// re-solved by [`race_stage_od`] at every trial ask.
pub fn indifference_ask(
    p: &ModelParams,
    regime: Regime,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    indifference_ask_held(p, regime, p.sigma / (4.0 * p.kappa), cfg)
}

/// As [`indifference_ask`], with an explicit held intensity for the
/// pre-commitment case. Ignored for on-demand speed.
pub fn indifference_ask_held(
    p: &ModelParams,
    regime: Regime,
    held_lambda: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let p = p.validate()?;
    let cfg = cfg.validate()?;
    check_lambda(held_lambda, "held lambda")?;
    let eps = 1e-12 * p.sigma;
    let abs_tol = 1e-3 * cfg.tol * p.sigma;
    let root = match regime {
        Regime::PreCommitment => bisect(
            |ask| {
                Ok(payoff_market_maker_pc(&p, ask, held_lambda, held_lambda)?
                    - payoff_bandit_pc(&p, ask, held_lambda, held_lambda)?)
            },
            eps,
            p.sigma - eps,
            abs_tol,
            cfg.max_iters,
            "indifference_ask",
        )?,
        Regime::OnDemand => {
            let news = p.delta / (p.delta + p.mu);
            let lambda0 = p.sigma / (4.0 * p.kappa);
            bisect(
                |ask| {
                    let l = race_stage_unchecked(&p, ask, lambda0, &cfg)?.value;
                    let maker = news * od_maker(&p, ask, l, l) + (1.0 - news) * ask;
                    let bandit = news * od_bandit(&p, ask, l, l);
                    Ok(maker - bandit)
                },
                eps,
                p.sigma - eps,
                abs_tol,
                cfg.max_iters,
                "indifference_ask",
            )?
        }
    };
    Ok(SolveResult {
        value: root.x,
        iterations: root.iterations,
        residual: root.width / (1.0 + root.x.abs()),
        converged: true,
    })
}

/// On-demand equilibrium intensity: solve the ask, then the race stage at
/// that ask.
pub fn symmetric_equilibrium_od(p: &ModelParams, cfg: &SolverConfig) -> Result<SolveResult> {
    symmetric_equilibrium_od_from(p, p.sigma / (4.0 * p.kappa), cfg)
}

pub fn symmetric_equilibrium_od_from(
    p: &ModelParams,
    lambda0: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let ask = indifference_ask(p, Regime::OnDemand, cfg)?.value;
    race_stage_od_from(p, ask, lambda0, cfg)
}

pub fn symmetric_equilibrium(
    p: &ModelParams,
    regime: Regime,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    match regime {
        Regime::PreCommitment => symmetric_equilibrium_pc(p, cfg),
        Regime::OnDemand => symmetric_equilibrium_od(p, cfg),
    }
}

pub fn symmetric_equilibrium_from(
    p: &ModelParams,
    regime: Regime,
    lambda0: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    match regime {
        Regime::PreCommitment => symmetric_equilibrium_pc_from(p, lambda0, cfg),
        Regime::OnDemand => symmetric_equilibrium_od_from(p, lambda0, cfg),
    }
}

/// Central finite-difference slope of the relevant payoff in own intensity,
/// at the symmetric point where the opponent also plays `lambda`.
///
/// Pre-commitment uses the ex-ante payoff; on-demand uses the bandit's
/// conditional race payoff (the maker's slope is identical at symmetry).
/// Zero at an equilibrium, positive below it, negative above.
pub fn foc_residual_fd(p: &ModelParams, regime: Regime, lambda: f64, ask: f64) -> Result<f64> {
    let p = p.validate()?;
    check_lambda(lambda, "lambda")?;
    let h = (1e-6 * lambda).max(1e-6).min(0.5 * lambda);
    let f = |l: f64| match regime {
        Regime::PreCommitment => pc_ex_ante_payoff(&p, ask, l, lambda),
        Regime::OnDemand => od_bandit(&p, ask, l, lambda),
    };
    Ok((f(lambda + h) - f(lambda - h)) / (2.0 * h))
}

/// The pre-commitment ex-ante payoff of trader i at a given ask.
pub fn pc_payoff(p: &ModelParams, ask: f64, lambda_i: f64, lambda_other: f64) -> f64 {
    pc_ex_ante_payoff(p, ask, lambda_i, lambda_other)
}
