//! Monte Carlo simulation of one round of the trading game.
//!
//! Each trial draws the first news and liquidity-investor arrival times. An
//! LI arriving first trades against the maker's quote and ends the game. News
//! arriving first starts a race between the bandit's snipe and the maker's
//! cancel, each an exponential arrival at the trader's speed intensity.
//!
//! Trial `i` draws from its own ChaCha8 stream: key derived from the seed via
//! `SeedableRng::seed_from_u64`, stream id `i`. Trials can therefore run in
//! any order or in parallel and still reproduce bit-for-bit. Estimates are
//! reduced over fixed-size chunks merged in index order, so they do not
//! depend on the thread count either.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::params::{ModelParams, Regime};

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_trials: u64,
    pub seed: u64,
    pub regime: Regime,
    pub lambda_m: f64,
    pub lambda_b: f64,
    pub ask: f64,
}

impl SimConfig {
    /// Inputs set to the regime's closed-form equilibrium.
    pub fn at_equilibrium(
        p: &ModelParams,
        regime: Regime,
        n_trials: u64,
        seed: u64,
    ) -> Result<Self> {
        let eq = analytic::equilibrium_point(p, regime)?;
        SimConfig {
            n_trials,
            seed,
            regime,
            lambda_m: eq.lambda_star,
            lambda_b: eq.lambda_star,
            ask: eq.ask,
        }
        .validate(p)
    }

    pub fn validate(self, p: &ModelParams) -> Result<Self> {
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials must be at least 1"));
        }
        if !(self.lambda_m >= 0.0
            && self.lambda_b >= 0.0
            && self.lambda_m.is_finite()
            && self.lambda_b.is_finite())
        {
            return Err(Error::invalid(
                "intensities must be finite and non-negative",
            ));
        }
        if self.lambda_m + self.lambda_b <= 0.0 {
            return Err(Error::invalid("lambda_m + lambda_b must be positive"));
        }
        if !(self.ask >= 0.0 && self.ask <= p.sigma) {
            return Err(Error::invalid("ask must lie in [0, sigma]"));
        }
        Ok(self)
    }

    fn cost_rates(&self, p: &ModelParams) -> (f64, f64) {
        let total = self.lambda_m + self.lambda_b;
        (
            p.kappa * self.lambda_m * total,
            p.kappa * self.lambda_b * total,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriggerType {
    News,
    LiquidityInvestor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RaceWinner {
    /// The maker's cancellation arrived first.
    Maker,
    /// The bandit's snipe arrived first.
    Bandit,
}

/// One realization of the game. Payoffs are gross of technology cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trigger_type: TriggerType,
    pub trigger_time: f64,
    pub news_sign: Option<i8>,
    pub race_winner: Option<RaceWinner>,
    pub race_duration: Option<f64>,
    pub payoff_m: f64,
    pub payoff_b: f64,
    pub rental_time_m: f64,
    pub rental_time_b: f64,
}

/// The random stream of trial `index`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Plays one trial with the given random source.
pub fn run_trial<R: Rng + ?Sized>(p: &ModelParams, cfg: &SimConfig, rng: &mut R) -> TrialOutcome {
    let t_news = exponential(rng, p.delta);
    let t_li = exponential(rng, p.mu);

    if t_news < t_li {
        let sign = if rng.random::<bool>() { 1 } else { -1 };
        let t_cancel = exponential(rng, cfg.lambda_m);
        let t_snipe = exponential(rng, cfg.lambda_b);
        // ties go to the cancel
        let (winner, race) = if t_snipe < t_cancel {
            (RaceWinner::Bandit, t_snipe)
        } else {
            (RaceWinner::Maker, t_cancel)
        };
        let (payoff_m, payoff_b) = match winner {
            RaceWinner::Bandit => (cfg.ask - p.sigma, p.sigma - cfg.ask),
            RaceWinner::Maker => (0.0, 0.0),
        };
        let rental = match cfg.regime {
            Regime::PreCommitment => t_news + race,
            Regime::OnDemand => race,
        };
        TrialOutcome {
            trigger_type: TriggerType::News,
            trigger_time: t_news,
            news_sign: Some(sign),
            race_winner: Some(winner),
            race_duration: Some(race),
            payoff_m,
            payoff_b,
            rental_time_m: rental,
            rental_time_b: rental,
        }
    } else {
        let rental = match cfg.regime {
            Regime::PreCommitment => t_li,
            Regime::OnDemand => 0.0,
        };
        TrialOutcome {
            trigger_type: TriggerType::LiquidityInvestor,
            trigger_time: t_li,
            news_sign: None,
            race_winner: None,
            race_duration: None,
            payoff_m: cfg.ask,
            payoff_b: 0.0,
            rental_time_m: rental,
            rental_time_b: rental,
        }
    }
}

/// Plays trial `index` on its own stream.
pub fn run_trial_indexed(p: &ModelParams, cfg: &SimConfig, index: u64) -> TrialOutcome {
    run_trial(p, cfg, &mut trial_rng(cfg.seed, index))
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    /// Sample standard deviation over √n; NaN when n < 2.
    pub std_error: f64,
    pub n: u64,
}

impl SimEstimate {
    /// (mean − target) / std_error, if the standard error is defined and
    /// positive.
    pub fn z_score(&self, target: f64) -> Option<f64> {
        if self.std_error.is_finite() && self.std_error > 0.0 {
            Some((self.mean - target) / self.std_error)
        } else if self.std_error == 0.0 && self.n >= 2 {
            Some(if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            })
        } else {
            None
        }
    }

    pub fn sample_variance(&self) -> f64 {
        self.std_error * self.std_error * self.n as f64
    }
}

/// Welford accumulator with a pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    fn estimate(&self) -> SimEstimate {
        let std_error = if self.n >= 2 {
            (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            f64::NAN
        };
        SimEstimate {
            mean: if self.n == 0 { f64::NAN } else { self.mean },
            std_error,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    news: Moments,
    snipe_given_news: Moments,
    race_given_news: Moments,
    rental_m: Moments,
    rental_b: Moments,
    net_m: Moments,
    net_b: Moments,
    net_per_hft: Moments,
    resource: Moments,
}

impl Tally {
    fn push(&mut self, p: &ModelParams, cfg: &SimConfig, t: &TrialOutcome) {
        let (rate_m, rate_b) = cfg.cost_rates(p);
        let is_news = t.trigger_type == TriggerType::News;
        self.news.push(if is_news { 1.0 } else { 0.0 });
        if let (Some(winner), Some(race)) = (t.race_winner, t.race_duration) {
            self.snipe_given_news.push(if winner == RaceWinner::Bandit {
                1.0
            } else {
                0.0
            });
            self.race_given_news.push(race);
        }
        self.rental_m.push(t.rental_time_m);
        self.rental_b.push(t.rental_time_b);
        let net_m = t.payoff_m - t.rental_time_m * rate_m;
        let net_b = t.payoff_b - t.rental_time_b * rate_b;
        self.net_m.push(net_m);
        self.net_b.push(net_b);
        self.net_per_hft.push(0.5 * (net_m + net_b));
        self.resource
            .push(cfg.lambda_m * t.rental_time_m + cfg.lambda_b * t.rental_time_b);
    }

    fn merge(&mut self, o: &Tally) {
        self.news.merge(&o.news);
        self.snipe_given_news.merge(&o.snipe_given_news);
        self.race_given_news.merge(&o.race_given_news);
        self.rental_m.merge(&o.rental_m);
        self.rental_b.merge(&o.rental_b);
        self.net_m.merge(&o.net_m);
        self.net_b.merge(&o.net_b);
        self.net_per_hft.merge(&o.net_per_hft);
        self.resource.merge(&o.resource);
    }
}

/// Every estimate produced by one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub regime: Regime,
    pub seed: u64,
    /// Fraction of trials triggered by news.
    pub news_frequency: SimEstimate,
    /// P(bandit wins | news); n counts news trials.
    pub snipe_probability: SimEstimate,
    /// Race duration given news; n counts news trials.
    pub race_duration: SimEstimate,
    pub rental_time_m: SimEstimate,
    pub rental_time_b: SimEstimate,
    /// Maker payoff net of rental cost.
    pub net_payoff_m: SimEstimate,
    /// Bandit payoff net of rental cost.
    pub net_payoff_b: SimEstimate,
    /// Per-trial average of the two net payoffs.
    pub net_payoff_per_hft: SimEstimate,
    /// Intensity-time rented by both traders.
    pub resource_usage: SimEstimate,
}

/// Runs `cfg.n_trials` trials and reduces them to estimates.
pub fn simulate(p: &ModelParams, cfg: &SimConfig) -> Result<SimSummary> {
    let p = p.validate()?;
    let cfg = cfg.validate(&p)?;
    let n_chunks = cfg.n_trials.div_ceil(CHUNK);
    let partials: Vec<Tally> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::default();
            let end = ((c + 1) * CHUNK).min(cfg.n_trials);
            for i in c * CHUNK..end {
                let t = run_trial_indexed(&p, &cfg, i);
                tally.push(&p, &cfg, &t);
            }
            tally
        })
        .collect();
    let mut total = Tally::default();
    for part in &partials {
        total.merge(part);
    }
    Ok(SimSummary {
        regime: cfg.regime,
        seed: cfg.seed,
        news_frequency: total.news.estimate(),
        snipe_probability: total.snipe_given_news.estimate(),
        race_duration: total.race_given_news.estimate(),
        rental_time_m: total.rental_m.estimate(),
        rental_time_b: total.rental_b.estimate(),
        net_payoff_m: total.net_m.estimate(),
        net_payoff_b: total.net_b.estimate(),
        net_payoff_per_hft: total.net_per_hft.estimate(),
        resource_usage: total.resource.estimate(),
    })
}

/// Mean per-HFT processor rental time.
pub fn estimate_rental_time(p: &ModelParams, cfg: &SimConfig) -> Result<SimEstimate> {
    Ok(simulate(p, cfg)?.rental_time_m)
}

/// Net payoffs of (maker, bandit).
pub fn estimate_net_payoffs(
    p: &ModelParams,
    cfg: &SimConfig,
) -> Result<(SimEstimate, SimEstimate)> {
    let s = simulate(p, cfg)?;
    Ok((s.net_payoff_m, s.net_payoff_b))
}

/// Mean race duration over news-triggered trials.
pub fn estimate_price_discovery(p: &ModelParams, cfg: &SimConfig) -> Result<SimEstimate> {
    let est = simulate(p, cfg)?.race_duration;
    if est.n == 0 {
        return Err(Error::invalid(
            "no news-triggered trial; price discovery undefined",
        ));
    }
    Ok(est)
}

pub fn estimate_resource_usage(p: &ModelParams, cfg: &SimConfig) -> Result<SimEstimate> {
    Ok(simulate(p, cfg)?.resource_usage)
}

#[derive(Serialize)]
struct TraceRecord {
    trial: u64,
    trigger_type: &'static str,
    trigger_time: f64,
    news_sign: Option<i8>,
    race_winner: Option<&'static str>,
    race_duration: Option<f64>,
    payoff_m: f64,
    payoff_b: f64,
    rental_m: f64,
    rental_b: f64,
}

/// Writes one CSV record per trial, with a header row.
pub fn write_trace<W: Write>(p: &ModelParams, cfg: &SimConfig, out: W) -> Result<()> {
    let p = p.validate()?;
    let cfg = cfg.validate(&p)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for i in 0..cfg.n_trials {
        let t = run_trial_indexed(&p, &cfg, i);
        w.serialize(TraceRecord {
            trial: i,
            trigger_type: match t.trigger_type {
                TriggerType::News => "News",
                TriggerType::LiquidityInvestor => "LiquidityInvestor",
            },
            trigger_time: t.trigger_time,
            news_sign: t.news_sign,
            race_winner: t.race_winner.map(|r| match r {
                RaceWinner::Maker => "Maker",
                RaceWinner::Bandit => "Bandit",
            }),
            race_duration: t.race_duration,
            payoff_m: t.payoff_m,
            payoff_b: t.payoff_b,
            rental_m: t.rental_time_m,
            rental_b: t.rental_time_b,
        })?;
    }
    w.flush()?;
    Ok(())
}
