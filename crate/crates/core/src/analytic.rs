//! Closed-form equilibrium and market-quality quantities.
//!
//! Everything here is a direct evaluation of a final expression. None of it
//! goes through first-order conditions; that path lives in [`crate::solver`]
//! so the two can check each other.
//!
//! Functions take parameters that have already passed
//! [`ModelParams::validate`]. Payoff and cost helpers additionally check
//! their intensity arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, Regime};

/// Equilibrium outcome of one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub regime: Regime,
    /// Ask relative to the fundamental value `v`.
    pub ask: f64,
    /// Per-HFT speed intensity.
    pub lambda_star: f64,
    /// Clearing price of processors, κ · 2λ*.
    pub speed_price: f64,
    /// Expected per-HFT processor rental duration.
    pub expected_rental_time: f64,
    /// Total intensity-time rented by both HFTs (Λ).
    pub resource_usage: f64,
    /// Expected delay from news to the first HFT order, 1/(2λ*).
    pub price_discovery_time: f64,
    /// Expected net payoff of one HFT.
    pub hft_rent: f64,
}

impl EquilibriumPoint {
    pub fn spread(&self) -> f64 {
        2.0 * self.ask
    }

    /// Ask level including the fundamental value.
    pub fn ask_absolute(&self, params: &ModelParams) -> f64 {
        params.v + self.ask
    }

    pub fn bid_absolute(&self, params: &ModelParams) -> f64 {
        params.v - self.ask
    }
}

fn news_share(p: &ModelParams) -> f64 {
    p.delta / (p.delta + p.mu)
}

// μσ / (κ(δ+μ))
fn race_scale(p: &ModelParams) -> f64 {
    p.mu * p.sigma / (p.kappa * (p.delta + p.mu))
}

// √(δ² + 3δx) − δ with x = race_scale, written as 3δx / (√(δ² + 3δx) + δ)
// so it keeps full precision when 3δx ≪ δ².
fn pc_excess(p: &ModelParams) -> f64 {
    let d = p.delta;
    let a = 3.0 * d * race_scale(p);
    a / ((d * d + a).sqrt() + d)
}

fn check_intensities(lambda_i: f64, lambda_other: f64) -> Result<()> {
    if !(lambda_i >= 0.0 && lambda_other >= 0.0) {
        return Err(Error::invalid(format!(
            "intensities must be non-negative, got {lambda_i} and {lambda_other}"
        )));
    }
    Ok(())
}

fn check_total(lambda_i: f64, lambda_other: f64) -> Result<f64> {
    check_intensities(lambda_i, lambda_other)?;
    let total = lambda_i + lambda_other;
    if total <= 0.0 {
        return Err(Error::invalid("total intensity must be positive"));
    }
    Ok(total)
}

/// Equilibrium ask, δσ/(δ+μ). Identical in both regimes and free of κ.
pub fn ask_star(p: &ModelParams) -> f64 {
    p.delta * p.sigma / (p.delta + p.mu)
}

/// Bid-ask spread, twice the equilibrium ask.
pub fn spread(p: &ModelParams) -> f64 {
    2.0 * ask_star(p)
}

/// Symmetric per-HFT intensity with speed rented before trading.
pub fn lambda_pc_star(p: &ModelParams) -> f64 {
    pc_excess(p) / 6.0
}

/// Symmetric per-HFT intensity with speed rented after news.
pub fn lambda_od_star(p: &ModelParams) -> f64 {
    p.mu * p.sigma / (4.0 * p.kappa * (p.delta + p.mu))
}

pub fn lambda_star(p: &ModelParams, regime: Regime) -> f64 {
    match regime {
        Regime::PreCommitment => lambda_pc_star(p),
        Regime::OnDemand => lambda_od_star(p),
    }
}

/// Uniform clearing price of processors, κ(λ_i + λ_{-i}).
pub fn speed_price(p: &ModelParams, lambda_i: f64, lambda_other: f64) -> Result<f64> {
    check_intensities(lambda_i, lambda_other)?;
    Ok(p.kappa * (lambda_i + lambda_other))
}

/// Per-unit-time rental expenditure of trader i, κλ_i(λ_i + λ_{-i}).
pub fn hft_cost_rate(p: &ModelParams, lambda_i: f64, lambda_other: f64) -> Result<f64> {
    check_intensities(lambda_i, lambda_other)?;
    Ok(p.kappa * lambda_i * (lambda_i + lambda_other))
}

/// Expected rental duration when speed is held from t = 0 until the game
/// ends: time to the trigger plus, after news, the race.
pub fn expected_rental_time_pc(p: &ModelParams, lambda_i: f64, lambda_other: f64) -> Result<f64> {
    let total = check_total(lambda_i, lambda_other)?;
    Ok(1.0 / (p.delta + p.mu) + news_share(p) / total)
}

/// Expected rental duration when speed is rented only for the post-news race.
pub fn expected_rental_time_od(p: &ModelParams, lambda_i: f64, lambda_other: f64) -> Result<f64> {
    let total = check_total(lambda_i, lambda_other)?;
    Ok(news_share(p) / total)
}

pub fn expected_rental_time(
    p: &ModelParams,
    regime: Regime,
    lambda_i: f64,
    lambda_other: f64,
) -> Result<f64> {
    match regime {
        Regime::PreCommitment => expected_rental_time_pc(p, lambda_i, lambda_other),
        Regime::OnDemand => expected_rental_time_od(p, lambda_i, lambda_other),
    }
}

fn pc_expected_cost(p: &ModelParams, lambda_i: f64, lambda_other: f64) -> Result<f64> {
    Ok(expected_rental_time_pc(p, lambda_i, lambda_other)?
        * hft_cost_rate(p, lambda_i, lambda_other)?)
}

/// Ex-ante payoff of the market maker under pre-committed speed.
pub fn payoff_market_maker_pc(
    p: &ModelParams,
    ask: f64,
    lambda_i: f64,
    lambda_other: f64,
) -> Result<f64> {
    let cost = pc_expected_cost(p, lambda_i, lambda_other)?;
    let sniped = lambda_other / (lambda_i + lambda_other);
    let news = news_share(p);
    Ok(-news * sniped * (p.sigma - ask) + (1.0 - news) * ask - cost)
}

/// Ex-ante payoff of the bandit under pre-committed speed.
pub fn payoff_bandit_pc(
    p: &ModelParams,
    ask: f64,
    lambda_i: f64,
    lambda_other: f64,
) -> Result<f64> {
    let cost = pc_expected_cost(p, lambda_i, lambda_other)?;
    let snipes = lambda_i / (lambda_i + lambda_other);
    Ok(news_share(p) * snipes * (p.sigma - ask) - cost)
}

/// Bandit payoff conditional on news, with speed rented on demand.
pub fn payoff_bandit_od(p: &ModelParams, ask: f64, lambda_b: f64, lambda_m: f64) -> Result<f64> {
    let total = check_total(lambda_b, lambda_m)?;
    Ok(lambda_b / total * (p.sigma - ask) - p.kappa * lambda_b)
}

/// Market-maker payoff conditional on news, with speed rented on demand.
pub fn payoff_maker_od(p: &ModelParams, ask: f64, lambda_m: f64, lambda_b: f64) -> Result<f64> {
    let total = check_total(lambda_b, lambda_m)?;
    Ok(lambda_b / total * (ask - p.sigma) - p.kappa * lambda_m)
}

/// Expected total intensity-time rented by both HFTs over one game.
pub fn resource_usage(p: &ModelParams, regime: Regime) -> f64 {
    let news = news_share(p);
    match regime {
        Regime::PreCommitment => news + pc_excess(p) / (3.0 * (p.delta + p.mu)),
        Regime::OnDemand => news,
    }
}

/// Expected net rent earned by one HFT.
pub fn hft_rent(p: &ModelParams, regime: Regime) -> f64 {
    let (d, m, s, k) = (p.delta, p.mu, p.sigma, p.kappa);
    match regime {
        Regime::PreCommitment => d * k / (18.0 * (d + m)) * (6.0 * race_scale(p) - pc_excess(p)),
        Regime::OnDemand => d * m * s / (4.0 * (d + m) * (d + m)),
    }
}

pub fn price_discovery_time(p: &ModelParams, regime: Regime) -> f64 {
    1.0 / (2.0 * lambda_star(p, regime))
}

/// All equilibrium quantities of one regime.
pub fn equilibrium_point(p: &ModelParams, regime: Regime) -> Result<EquilibriumPoint> {
    let p = p.validate()?;
    let lambda = lambda_star(&p, regime);
    Ok(EquilibriumPoint {
        regime,
        ask: ask_star(&p),
        lambda_star: lambda,
        speed_price: speed_price(&p, lambda, lambda)?,
        expected_rental_time: expected_rental_time(&p, regime, lambda, lambda)?,
        resource_usage: resource_usage(&p, regime),
        price_discovery_time: price_discovery_time(&p, regime),
        hft_rent: hft_rent(&p, regime),
    })
}
