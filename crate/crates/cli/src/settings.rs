//! Typed view of the config file plus command-line overrides.

use std::path::Path;

use liquidspeed::config::KvConfig;
use liquidspeed::solver::SolverConfig;
use liquidspeed::sweep::{parse_grid, SweepSpec};
use liquidspeed::{Error, ModelParams, ParamKey, Regime, Result};

/// Every key a config file or `--set` may name.
pub const KNOWN_KEYS: &[&str] = &[
    "delta",
    "mu",
    "sigma",
    "kappa",
    "eta",
    "v",
    "regime",
    "trials",
    "seed",
    "sweep_var",
    "grid",
    "regimes",
    "with_simulation",
    "sim_trials",
    "fuzz_draws",
    "fuzz_seed",
    "tol",
    "max_iters",
    "damping",
];

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SIM_TRIALS: u64 = 100_000;

pub struct Settings {
    pub cfg: KvConfig,
    pub params: ModelParams,
}

pub fn parse_regimes(text: &str) -> Result<Vec<Regime>> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("both") {
        return Ok(Regime::BOTH.to_vec());
    }
    let regimes = text
        .split(',')
        .map(|s| s.parse::<Regime>())
        .collect::<Result<Vec<_>>>()?;
    if regimes.is_empty() {
        return Err(Error::Config {
            line: None,
            message: "no regime given".into(),
        });
    }
    Ok(regimes)
}

fn keyed(cfg: &KvConfig, key: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::Config {
            line: cfg.line_of(key),
            message: format!("`{key}`: {other}"),
        },
    }
}

impl Settings {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let mut cfg = KvConfig::load(path)?;
        for o in overrides {
            cfg.apply_override(o)?;
        }
        cfg.reject_unknown(KNOWN_KEYS)?;
        let params = ModelParams::from_config(&cfg).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::Config {
                line: None,
                message: msg,
            },
            other => other,
        })?;
        Ok(Settings { cfg, params })
    }

    /// `--regime` wins over the config key `key`; default both.
    pub fn regimes(&self, flag: Option<&str>, key: &str) -> Result<Vec<Regime>> {
        match flag {
            Some(f) => parse_regimes(f).map_err(|e| Error::Config {
                line: None,
                message: format!("--regime: {e}"),
            }),
            None => match self.cfg.get_str(key) {
                Some(v) => parse_regimes(v).map_err(|e| keyed(&self.cfg, key, e)),
                None => Ok(Regime::BOTH.to_vec()),
            },
        }
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<Option<u64>> {
        Ok(flag.or(self.cfg.get_u64("seed")?))
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        SolverConfig {
            tol: self.cfg.get_f64("tol")?.unwrap_or(d.tol),
            max_iters: self
                .cfg
                .get_u64("max_iters")?
                .map_or(d.max_iters, |v| v as usize),
            damping: self.cfg.get_f64("damping")?.unwrap_or(d.damping),
            bracket_hi: None,
        }
        .validate()
        .map_err(|e| Error::Config {
            line: None,
            message: e.to_string(),
        })
    }

    /// Sweep definition from `sweep_var`, `grid`, `regimes`,
    /// `with_simulation`, `sim_trials`.
    pub fn sweep_spec(
        &self,
        regime_flag: Option<&str>,
        trials: Option<u64>,
        seed: u64,
    ) -> Result<SweepSpec> {
        let cfg = &self.cfg;
        let sweep_var = match cfg.get_str("sweep_var") {
            Some(v) => v
                .parse::<ParamKey>()
                .map_err(|e| keyed(cfg, "sweep_var", e))?,
            None => ParamKey::Delta,
        };
        let grid = match cfg.get_str("grid") {
            Some(g) => parse_grid(g).map_err(|e| keyed(cfg, "grid", e))?,
            None => {
                return Err(Error::Config {
                    line: None,
                    message: "missing required key `grid`".into(),
                })
            }
        };
        let spec = SweepSpec {
            base: self.params,
            sweep_var,
            grid,
            regimes: self.regimes(regime_flag, "regimes")?,
            with_simulation: cfg.get_bool("with_simulation")?.unwrap_or(false),
            sim_trials: trials
                .or(cfg.get_u64("sim_trials")?)
                .unwrap_or(DEFAULT_SIM_TRIALS),
            seed,
        };
        spec.validate().map_err(|e| keyed(cfg, "grid", e))?;
        Ok(spec)
    }
}
