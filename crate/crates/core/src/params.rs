//! Exogenous model parameters and the exchange regime.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::KvConfig;
use crate::error::{Error, Result};

/// Exogenous parameters of the two-HFT trading game.
///
/// Rates are per unit time; `sigma`, `eta` and `v` are in price units and
/// `kappa` is the slope of the processor supply schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// News arrival rate.
    pub delta: f64,
    /// Liquidity-investor arrival rate.
    pub mu: f64,
    /// News jump size.
    pub sigma: f64,
    /// Processor supply elasticity.
    pub kappa: f64,
    /// Liquidity-investor private value. Only constrains inputs.
    pub eta: f64,
    /// Fundamental value at t = 0. A pure offset on quote levels.
    pub v: f64,
}

impl ModelParams {
    /// Builds parameters with `v = 0` and `eta = 2 * sigma`, then validates.
    pub fn new(delta: f64, mu: f64, sigma: f64, kappa: f64) -> Result<Self> {
        ModelParams {
            delta,
            mu,
            sigma,
            kappa,
            eta: 2.0 * sigma,
            v: 0.0,
        }
        .validate()
    }

    /// The parameterization used for the δ-sweeps: μ = 2, κ = 0.25, σ = 1.
    pub fn reference(delta: f64) -> Result<Self> {
        Self::new(delta, 2.0, 1.0, 0.25)
    }

    /// Returns `self` unchanged if every constraint holds, otherwise the
    /// first violated constraint.
    pub fn validate(self) -> Result<Self> {
        for (name, value) in [
            ("delta", self.delta),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("kappa", self.kappa),
            ("eta", self.eta),
            ("v", self.v),
        ] {
            if !value.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        for (name, value) in [
            ("delta", self.delta),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("kappa", self.kappa),
        ] {
            if value <= 0.0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if self.eta <= self.sigma {
            return Err(Error::invalid("eta must exceed sigma"));
        }
        Ok(self)
    }

    pub fn get(&self, key: ParamKey) -> f64 {
        match key {
            ParamKey::Delta => self.delta,
            ParamKey::Mu => self.mu,
            ParamKey::Sigma => self.sigma,
            ParamKey::Kappa => self.kappa,
            ParamKey::Eta => self.eta,
            ParamKey::V => self.v,
        }
    }

    /// Copy with one field replaced. Not validated.
    pub fn with(mut self, key: ParamKey, value: f64) -> Self {
        match key {
            ParamKey::Delta => self.delta = value,
            ParamKey::Mu => self.mu = value,
            ParamKey::Sigma => self.sigma = value,
            ParamKey::Kappa => self.kappa = value,
            ParamKey::Eta => self.eta = value,
            ParamKey::V => self.v = value,
        }
        self
    }

    /// Reads `delta`, `mu`, `sigma`, `kappa`, `eta`, `v` from a parsed config.
    ///
    /// Missing `v` defaults to 0 and missing `eta` to `2 * sigma`. Other keys
    /// in the config are ignored here; callers decide which extra keys they
    /// accept.
    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        let required = |key: &str| -> Result<f64> {
            cfg.get_f64(key)?
                .ok_or_else(|| Error::config(None, format!("missing required key `{key}`")))
        };
        let delta = required("delta")?;
        let mu = required("mu")?;
        let sigma = required("sigma")?;
        let kappa = required("kappa")?;
        let eta = cfg.get_f64("eta")?.unwrap_or(2.0 * sigma);
        let v = cfg.get_f64("v")?.unwrap_or(0.0);
        ModelParams {
            delta,
            mu,
            sigma,
            kappa,
            eta,
            v,
        }
        .validate()
    }
}

/// Names of the fields of [`ModelParams`], as used in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKey {
    Delta,
    Mu,
    Sigma,
    Kappa,
    Eta,
    V,
}

impl ParamKey {
    pub const ALL: [ParamKey; 6] = [
        ParamKey::Delta,
        ParamKey::Mu,
        ParamKey::Sigma,
        ParamKey::Kappa,
        ParamKey::Eta,
        ParamKey::V,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamKey::Delta => "delta",
            ParamKey::Mu => "mu",
            ParamKey::Sigma => "sigma",
            ParamKey::Kappa => "kappa",
            ParamKey::Eta => "eta",
            ParamKey::V => "v",
        }
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamKey::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown parameter `{s}`")))
    }
}

/// Timing of the processor market relative to trading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Centralized exchange: speed is rented at t = 0, before quoting.
    #[serde(rename = "pc")]
    PreCommitment,
    /// Decentralized exchange: speed is rented only after news.
    #[serde(rename = "od")]
    OnDemand,
}

impl Regime {
    pub const BOTH: [Regime; 2] = [Regime::PreCommitment, Regime::OnDemand];

    pub fn short_name(self) -> &'static str {
        match self {
            Regime::PreCommitment => "pc",
            Regime::OnDemand => "od",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pc" | "precommitment" | "pre-commitment" => Ok(Regime::PreCommitment),
            "od" | "ondemand" | "on-demand" => Ok(Regime::OnDemand),
            other => Err(Error::invalid(format!("unknown regime `{other}`"))),
        }
    }
}
