//! Agent-based model of a banking system trading one risky asset.
//!
//! Banks hold cash, units of a single risky asset and interbank claims. Each
//! step they decide to buy, sell or wait based on the last return, their
//! orders move the price through excess demand, and banks whose equity is
//! exhausted default. Defaults propagate through the lending network to
//! a fixed point.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the command
//! line and parallel ensembles live in the `banksim` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bank;
pub mod cascade;
pub mod config;
pub mod engine;
mod error;
pub mod market;
pub mod metrics;
pub mod network;

pub use bank::{annual_to_step_rate, BankBehavior, BankState};
pub use cascade::{run_cascade, total_losses, CascadeResult, SystemicLoss};
pub use config::SimConfig;
pub use engine::{
    monte_carlo, run, run_with, simulate_outcome, DefaultEvent, DefaultTrigger, EnsembleSummary,
    RunOutcome, RunRecord, SimState, StepReport,
};
pub use error::{Error, FieldError, Result};
pub use market::{Attitude, MarketState, Order};
pub use metrics::{BankRatios, StepMetrics};
pub use network::{ErdosRenyi, ExposureMatrix, NetworkGenerator};
