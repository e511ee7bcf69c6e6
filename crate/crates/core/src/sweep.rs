//! Parameter sweeps, CSV tables and regime-comparison claim checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, EquilibriumPoint};
use crate::error::{Error, Result};
use crate::params::{ModelParams, ParamKey, Regime};
use crate::sim::{self, SimConfig};

/// Fixed CSV column order.
pub const CSV_HEADER: &str = "sweep_var,sweep_value,regime,ask,lambda_star,speed_price,resource_usage,price_discovery,hft_rent,sim_rent_mean,sim_rent_se,sim_rental_mean,sim_rental_se,n_trials";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub sweep_var: ParamKey,
    pub grid: Vec<f64>,
    pub regimes: Vec<Regime>,
    pub with_simulation: bool,
    pub sim_trials: u64,
    pub seed: u64,
}

impl SweepSpec {
    /// Analytic-only sweep over both regimes.
    pub fn analytic(base: ModelParams, sweep_var: ParamKey, grid: Vec<f64>) -> Self {
        SweepSpec {
            base,
            sweep_var,
            grid,
            regimes: Regime::BOTH.to_vec(),
            with_simulation: false,
            sim_trials: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(
            self.sweep_var,
            ParamKey::Delta | ParamKey::Mu | ParamKey::Sigma | ParamKey::Kappa
        ) {
            return Err(Error::invalid(format!(
                "sweep_var must be one of delta, mu, sigma, kappa, got {}",
                self.sweep_var
            )));
        }
        if self.grid.is_empty() {
            return Err(Error::invalid("grid must be nonempty"));
        }
        if self
            .grid
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::invalid("grid must be strictly increasing"));
        }
        if self.regimes.is_empty() {
            return Err(Error::invalid("at least one regime required"));
        }
        if self.with_simulation && self.sim_trials == 0 {
            return Err(Error::invalid(
                "sim_trials must be at least 1 when simulating",
            ));
        }
        for &value in &self.grid {
            self.point(value)?;
        }
        Ok(())
    }

    fn point(&self, value: f64) -> Result<ModelParams> {
        self.base
            .with(self.sweep_var, value)
            .validate()
            .map_err(|e| self.wrap(value, e))
    }

    fn wrap(&self, value: f64, e: Error) -> Error {
        Error::GridPoint {
            sweep_var: self.sweep_var.to_string(),
            value,
            source: Box::new(e),
        }
    }
}

/// Parses a grid: either a comma-separated list or `start:stop:count`,
/// which expands to `count` log-spaced points from `start` to `stop`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::invalid("grid must be nonempty"));
    }
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad grid bound `{s}`")))
        };
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Error::invalid(format!("bad grid count `{}`", parts[2])))?;
        return log_space(start, stop, count);
    }
    if parts.len() != 1 {
        return Err(Error::invalid(format!("bad grid `{text}`")));
    }
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad grid value `{s}`")))
        })
        .collect::<Result<Vec<_>>>()
        .and_then(|g| {
            if g.is_empty() {
                Err(Error::invalid("grid must be nonempty"))
            } else {
                Ok(g)
            }
        })
}

/// `count` points from `start` to `stop`, equally spaced in log.
pub fn log_space(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("grid must be nonempty"));
    }
    if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) {
        return Err(Error::invalid("log-spaced grid bounds must be positive"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = (start.ln(), stop.ln());
    let step = (b - a) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| match i {
            0 => start,
            i if i == count - 1 => stop,
            i => (a + step * i as f64).exp(),
        })
        .collect())
}

/// One (grid value, regime) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub regime: Regime,
    pub ask: f64,
    pub lambda_star: f64,
    pub speed_price: f64,
    pub resource_usage: f64,
    pub price_discovery: f64,
    pub hft_rent: f64,
    pub sim_rent_mean: Option<f64>,
    pub sim_rent_se: Option<f64>,
    pub sim_rental_mean: Option<f64>,
    pub sim_rental_se: Option<f64>,
    pub n_trials: Option<u64>,
}

impl SweepRow {
    pub fn from_point(sweep_var: &str, sweep_value: f64, eq: &EquilibriumPoint) -> Self {
        SweepRow {
            sweep_var: sweep_var.to_string(),
            sweep_value,
            regime: eq.regime,
            ask: eq.ask,
            lambda_star: eq.lambda_star,
            speed_price: eq.speed_price,
            resource_usage: eq.resource_usage,
            price_discovery: eq.price_discovery_time,
            hft_rent: eq.hft_rent,
            sim_rent_mean: None,
            sim_rent_se: None,
            sim_rental_mean: None,
            sim_rental_se: None,
            n_trials: None,
        }
    }
}

// SplitMix64 finalizer; spreads (seed, point, regime) into unrelated seeds.
fn mix_seed(seed: u64, point: u64, regime: Regime) -> u64 {
    let mut z = seed
        .wrapping_add(point.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(match regime {
            Regime::PreCommitment => 0x632B_E59B_D9B4_E019,
            Regime::OnDemand => 0x8CB9_2BA7_2F3D_8DD7,
        });
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One row per (grid value, regime), grid-major in the given regime order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let var = spec.sweep_var.to_string();
    let per_point: Vec<Vec<SweepRow>> = spec
        .grid
        .par_iter()
        .enumerate()
        .map(|(idx, &value)| {
            let p = spec.point(value)?;
            spec.regimes
                .iter()
                .map(|&regime| {
                    let eq =
                        analytic::equilibrium_point(&p, regime).map_err(|e| spec.wrap(value, e))?;
                    let mut row = SweepRow::from_point(&var, value, &eq);
                    if spec.with_simulation {
                        let cfg = SimConfig::at_equilibrium(
                            &p,
                            regime,
                            spec.sim_trials,
                            mix_seed(spec.seed, idx as u64, regime),
                        )
                        .map_err(|e| spec.wrap(value, e))?;
                        let s = sim::simulate(&p, &cfg).map_err(|e| spec.wrap(value, e))?;
                        row.sim_rent_mean = Some(s.net_payoff_per_hft.mean);
                        row.sim_rent_se = Some(s.net_payoff_per_hft.std_error);
                        row.sim_rental_mean = Some(s.rental_time_m.mean);
                        row.sim_rental_se = Some(s.rental_time_m.std_error);
                        row.n_trials = Some(s.rental_time_m.n);
                    }
                    Ok(row)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Log-uniform random parameter draws: δ, μ in [0.1, 10], σ in [0.1, 4],
/// κ in [0.05, 2].
pub fn fuzz_params(draws: usize, seed: u64) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log_uniform = |lo: f64, hi: f64| {
        let u: f64 = rng.random();
        (lo.ln() + u * (hi.ln() - lo.ln())).exp()
    };
    (0..draws)
        .map(|_| {
            let delta = log_uniform(0.1, 10.0);
            let mu = log_uniform(0.1, 10.0);
            let sigma = log_uniform(0.1, 4.0);
            let kappa = log_uniform(0.05, 2.0);
            ModelParams::new(delta, mu, sigma, kappa).expect("fuzz ranges are valid")
        })
        .collect()
}

/// Analytic rows for a list of parameter points, labelled `draw` with the
/// draw index as sweep value.
pub fn rows_for_points(points: &[ModelParams]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(points.len() * 2);
    for (i, p) in points.iter().enumerate() {
        for regime in Regime::BOTH {
            rows.push(SweepRow::from_point(
                "draw",
                i as f64,
                &analytic::equilibrium_point(p, regime)?,
            ));
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::invalid("unexpected CSV header"));
    }
    r.deserialize()
        .map(|rec| rec.map_err(Error::from))
        .collect()
}

/// The regime comparisons checked at every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// Same bid-ask spread in both regimes.
    SpreadEqual,
    /// On-demand intensity exceeds pre-commitment intensity.
    LambdaOdAbovePc,
    /// On-demand processor price exceeds pre-commitment price.
    SpeedPriceOdAbovePc,
    /// Price discovery is faster on demand.
    DiscoveryOdFaster,
    /// Pre-commitment rents more processor time.
    ResourcePcAboveOd,
    /// Pre-commitment pays higher HFT rents.
    RentPcAboveOd,
}

impl Claim {
    pub const ALL: [Claim; 6] = [
        Claim::SpreadEqual,
        Claim::LambdaOdAbovePc,
        Claim::SpeedPriceOdAbovePc,
        Claim::DiscoveryOdFaster,
        Claim::ResourcePcAboveOd,
        Claim::RentPcAboveOd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::SpreadEqual => "spread_equal",
            Claim::LambdaOdAbovePc => "lambda_od_above_pc",
            Claim::SpeedPriceOdAbovePc => "speed_price_od_above_pc",
            Claim::DiscoveryOdFaster => "discovery_od_faster",
            Claim::ResourcePcAboveOd => "resource_pc_above_od",
            Claim::RentPcAboveOd => "rent_pc_above_od",
        }
    }

    fn holds(self, pc: &SweepRow, od: &SweepRow) -> bool {
        match self {
            // asks are below σ, so this is at least as strict as 1e-12·σ
            Claim::SpreadEqual => {
                (2.0 * pc.ask - 2.0 * od.ask).abs() <= 1e-12 * pc.ask.abs().max(od.ask.abs())
            }
            Claim::LambdaOdAbovePc => od.lambda_star > pc.lambda_star,
            Claim::SpeedPriceOdAbovePc => od.speed_price > pc.speed_price,
            Claim::DiscoveryOdFaster => od.price_discovery < pc.price_discovery,
            Claim::ResourcePcAboveOd => pc.resource_usage > od.resource_usage,
            Claim::RentPcAboveOd => pc.hft_rent > od.hft_rent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointVerdict {
    pub sweep_var: String,
    pub sweep_value: f64,
    pub verdicts: BTreeMap<Claim, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub claim: Claim,
    pub pc: SweepRow,
    pub od: SweepRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub all_pass: bool,
    /// Per claim: true iff it held at every point.
    pub claims: BTreeMap<Claim, bool>,
    pub points: Vec<PointVerdict>,
    pub violations: Vec<Violation>,
}

impl ClaimReport {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "claim check over {} grid points", self.points.len());
        for (claim, ok) in &self.claims {
            let _ = writeln!(
                s,
                "  {:<26} {}",
                claim.name(),
                if *ok { "PASS" } else { "FAIL" }
            );
        }
        for v in &self.violations {
            let _ = writeln!(
                s,
                "  violation: {} at {}={} (pc: lambda={:.6} price={:.6} discovery={:.6} usage={:.6} rent={:.6}; od: lambda={:.6} price={:.6} discovery={:.6} usage={:.6} rent={:.6})",
                v.claim.name(),
                v.pc.sweep_var,
                v.pc.sweep_value,
                v.pc.lambda_star,
                v.pc.speed_price,
                v.pc.price_discovery,
                v.pc.resource_usage,
                v.pc.hft_rent,
                v.od.lambda_star,
                v.od.speed_price,
                v.od.price_discovery,
                v.od.resource_usage,
                v.od.hft_rent,
            );
        }
        let _ = writeln!(
            s,
            "overall: {}",
            if self.all_pass { "PASS" } else { "FAIL" }
        );
        s
    }
}

type RegimePair<'a> = (Option<&'a SweepRow>, Option<&'a SweepRow>);

/// Checks every regime comparison at every grid point. Uses the analytic
/// columns only.
pub fn check_claims(rows: &[SweepRow]) -> Result<ClaimReport> {
    // (sweep_var, sweep_value bits) -> (pc, od), in first-seen order
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut pairs: BTreeMap<(String, u64), RegimePair> = BTreeMap::new();
    for row in rows {
        let key = (row.sweep_var.clone(), row.sweep_value.to_bits());
        let slot = pairs.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (None, None)
        });
        let target = match row.regime {
            Regime::PreCommitment => &mut slot.0,
            Regime::OnDemand => &mut slot.1,
        };
        if target.is_some() {
            return Err(Error::invalid(format!(
                "duplicate {} row at {}={}",
                row.regime, row.sweep_var, row.sweep_value
            )));
        }
        *target = Some(row);
    }
    if order.is_empty() {
        return Err(Error::invalid("no rows to check"));
    }

    let mut claims: BTreeMap<Claim, bool> = Claim::ALL.iter().map(|&c| (c, true)).collect();
    let mut points = Vec::with_capacity(order.len());
    let mut violations = Vec::new();
    for key in &order {
        let (pc, od) = match pairs[key] {
            (Some(pc), Some(od)) => (pc, od),
            _ => {
                return Err(Error::invalid(format!(
                    "both regimes required at {}={}",
                    key.0,
                    f64::from_bits(key.1)
                )))
            }
        };
        let mut verdicts = BTreeMap::new();
        for claim in Claim::ALL {
            let ok = claim.holds(pc, od);
            verdicts.insert(claim, ok);
            if !ok {
                claims.insert(claim, false);
                violations.push(Violation {
                    claim,
                    pc: pc.clone(),
                    od: od.clone(),
                });
            }
        }
        points.push(PointVerdict {
            sweep_var: key.0.clone(),
            sweep_value: f64::from_bits(key.1),
            verdicts,
        });
    }
    Ok(ClaimReport {
        all_pass: violations.is_empty(),
        claims,
        points,
        violations,
    })
}

/// Shape of the δ-sweep curves, one flag per pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveShape {
    pub lambda_pc_increasing: bool,
    pub lambda_od_decreasing: bool,
    pub discovery_od_below_pc: bool,
    pub resource_pc_increasing: bool,
    pub resource_od_increasing: bool,
    pub resource_pc_above_od: bool,
    pub rent_pc_above_od: bool,
}

impl CurveShape {
    pub fn all(&self) -> bool {
        self.lambda_pc_increasing
            && self.lambda_od_decreasing
            && self.discovery_od_below_pc
            && self.resource_pc_increasing
            && self.resource_od_increasing
            && self.resource_pc_above_od
            && self.rent_pc_above_od
    }
}

/// Column of one regime, in row order.
pub fn column(rows: &[SweepRow], regime: Regime, f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
    rows.iter().filter(|r| r.regime == regime).map(f).collect()
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Evaluates the curve shapes of a sweep that covers both regimes at every
/// grid value, in increasing grid order.
pub fn curve_shape(rows: &[SweepRow]) -> CurveShape {
    let pc = |f: fn(&SweepRow) -> f64| column(rows, Regime::PreCommitment, f);
    let od = |f: fn(&SweepRow) -> f64| column(rows, Regime::OnDemand, f);
    let pairwise =
        |a: Vec<f64>, b: Vec<f64>| a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x < y);
    CurveShape {
        lambda_pc_increasing: strictly_increasing(&pc(|r| r.lambda_star)),
        lambda_od_decreasing: strictly_decreasing(&od(|r| r.lambda_star)),
        discovery_od_below_pc: pairwise(od(|r| r.price_discovery), pc(|r| r.price_discovery)),
        resource_pc_increasing: strictly_increasing(&pc(|r| r.resource_usage)),
        resource_od_increasing: strictly_increasing(&od(|r| r.resource_usage)),
        resource_pc_above_od: pairwise(od(|r| r.resource_usage), pc(|r| r.resource_usage)),
        rent_pc_above_od: pairwise(od(|r| r.hft_rent), pc(|r| r.hft_rent)),
    }
}
