//! Equilibrium solver and Monte Carlo simulator for a two-trader speed race
//! on a limit order book, comparing speed rented before trading
//! (pre-commitment, a co-located centralized exchange) with speed rented
//! only once news arrives (on-demand, a decentralized exchange).
//!
//! * [`params`]: exogenous parameters and validation.
//! * [`analytic`]: closed-form equilibria and market-quality measures.
//! * [`solver`]: numerical equilibria from payoffs alone.
//! * [`sim`]: discrete-event Monte Carlo of the trading game.
//! * [`sweep`]: parameter sweeps, CSV output and claim checks.

pub mod analytic;
pub mod config;
pub mod error;
pub mod params;
mod search;
pub mod sim;
pub mod solver;
pub mod sweep;

pub use analytic::EquilibriumPoint;
pub use error::{Error, Result};
pub use params::{ModelParams, ParamKey, Regime};
