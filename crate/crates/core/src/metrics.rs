//! Capital ratios, aggregate observables and ensemble estimators.

use alloc::vec::Vec;

use crate::bank::{BankBehavior, BankState};

/// Regulatory floor for the total capital adequacy ratio, in percent.
pub const CAR_FLOOR_PCT: f64 = 8.0;
/// Regulatory floor for the common-equity adequacy ratio, in percent.
pub const CEAR_FLOOR_PCT: f64 = 4.5;

/// Capital adequacy ratio `(C + J + K − L − D) / (J + K) × 100`.
///
/// `None` when the risk-weighted assets `J + K` are zero.
pub fn car(cash: f64, financial_assets: f64, credit: f64, debt: f64, deposit: f64) -> Option<f64> {
    let rwa = financial_assets + credit;
    if rwa == 0.0 {
        return None;
    }
    Some((cash + financial_assets + credit - debt - deposit) / rwa * 100.0)
}

/// Common-equity adequacy ratio
/// `C / (J + (1 + λ_I·c)·K + c·|y|·V·S) × 100`.
///
/// `None` when the denominator is zero.
#[allow(clippy::too_many_arguments)]
pub fn cear(
    cash: f64,
    financial_assets: f64,
    credit: f64,
    attitude: i8,
    volume: f64,
    price: f64,
    c: f64,
    rate_interbank: f64,
) -> Option<f64> {
    let operational = c * f64::from(attitude.unsigned_abs()) * volume * price;
    let denom = financial_assets + (1.0 + rate_interbank * c) * credit + operational;
    if denom == 0.0 {
        return None;
    }
    Some(cash / denom * 100.0)
}

/// `(Σ C_i, Σ n_i)` over every bank, defaulted ones included.
pub fn totals<'a, I>(banks: I) -> (f64, f64)
where
    I: IntoIterator<Item = &'a BankState>,
{
    banks
        .into_iter()
        .fold((0.0, 0.0), |(c, n), b| (c + b.cash, n + b.asset_units))
}

/// Fraction of trend followers (`a > 0`).
pub fn alpha(behaviors: &[BankBehavior]) -> f64 {
    if behaviors.is_empty() {
        return 0.0;
    }
    let followers = behaviors.iter().filter(|b| b.is_trend_follower()).count();
    followers as f64 / behaviors.len() as f64
}

fn defaulted_by(time: Option<u64>, horizon: u64) -> bool {
    time.is_some_and(|t| t <= horizon)
}

/// Relative frequency of runs in which `bank` defaulted at or before
/// `horizon`. Each run is given as its per-bank default times.
pub fn default_probability<'a, I>(runs: I, bank: usize, horizon: u64) -> f64
where
    I: IntoIterator<Item = &'a [Option<u64>]>,
{
    frequency(runs, |times| defaulted_by(times[bank], horizon))
}

/// Relative frequency of runs with at least `k` defaults by `horizon`.
pub fn systemic_default_probability<'a, I>(runs: I, k: usize, horizon: u64) -> f64
where
    I: IntoIterator<Item = &'a [Option<u64>]>,
{
    frequency(runs, |times| {
        times.iter().filter(|&&t| defaulted_by(t, horizon)).count() >= k
    })
}

fn frequency<'a, I, F>(runs: I, hit: F) -> f64
where
    I: IntoIterator<Item = &'a [Option<u64>]>,
    F: Fn(&[Option<u64>]) -> bool,
{
    let (mut total, mut hits) = (0usize, 0usize);
    for run in runs {
        total += 1;
        if hit(run) {
            hits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Streaming mean and sample standard deviation (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation; zero with fewer than two observations.
    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            libm::sqrt(self.m2 / (self.count - 1) as f64)
        }
    }
}

/// Per-bank capital ratios at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BankRatios {
    pub car_pct: Option<f64>,
    pub cear_pct: Option<f64>,
    pub alive: bool,
}

impl BankRatios {
    pub fn car_breach(&self) -> bool {
        self.car_pct.is_some_and(|v| v < CAR_FLOOR_PCT)
    }

    pub fn cear_breach(&self) -> bool {
        self.cear_pct.is_some_and(|v| v < CEAR_FLOOR_PCT)
    }
}

/// Observables recorded after each step.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepMetrics {
    pub step: u64,
    pub price: f64,
    pub log_return: f64,
    pub total_cash: f64,
    pub total_units: f64,
    /// `H(t)` over every bank defaulted so far, at frozen values.
    pub cumulative_loss: f64,
    pub n_defaults: usize,
    /// Ratios of defaulted banks stay at the values recorded when they failed.
    pub banks: Vec<BankRatios>,
}
