//! Balance sheet of a single bank.
//!
//! Assets are cash `C`, risky-asset holdings `J = n·S` and interbank credit
//! `K`; liabilities are interbank debt `L` and the constant deposit `D`.
//! Credit and debt are not stored here: they are aggregated from the
//! [`ExposureMatrix`](crate::network::ExposureMatrix) and passed in.

use crate::error::{Error, Result};

/// Mutable balance-sheet variables of one bank.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BankState {
    pub id: usize,
    /// Cash. May go negative through interest payments.
    pub cash: f64,
    /// Units of the risky asset held, always `>= 0`.
    pub asset_units: f64,
    deposit: f64,
    alive: bool,
    default_time: Option<u64>,
    frozen_value: Option<f64>,
}

impl BankState {
    pub fn new(id: usize, cash: f64, asset_units: f64, deposit: f64) -> Self {
        Self {
            id,
            cash,
            asset_units,
            deposit,
            alive: true,
            default_time: None,
            frozen_value: None,
        }
    }

    /// Deposit `D`, fixed for the lifetime of the bank.
    pub fn deposit(&self) -> f64 {
        self.deposit
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    /// Step at which the bank defaulted.
    pub fn default_time(&self) -> Option<u64> {
        self.default_time
    }

    /// Economic value `C + J + K` captured when the bank defaulted.
    pub fn frozen_value(&self) -> Option<f64> {
        self.frozen_value
    }

    /// Mark-to-market value of the asset position, `J = n·S`.
    pub fn financial_assets(&self, price: f64) -> f64 {
        financial_assets(self.asset_units, price)
    }

    /// `E = C + J + K - L - D`.
    pub fn equity(&self, price: f64, credit: f64, debt: f64) -> f64 {
        equity(
            self.cash,
            self.financial_assets(price),
            credit,
            debt,
            self.deposit,
        )
    }

    /// Survival condition `C + J + K > L + D`.
    pub fn is_solvent(&self, price: f64, credit: f64, debt: f64) -> bool {
        self.equity(price, credit, debt) > 0.0
    }

    /// Economic value `C + J + K` used for systemic-loss accounting.
    pub fn economic_value(&self, price: f64, credit: f64) -> f64 {
        self.cash + self.financial_assets(price) + credit
    }

    /// Pays deposit and interbank interest and receives interbank interest:
    /// `C -= λ_D·D + λ_I·L - λ_I·K`.
    pub fn apply_interest(
        &mut self,
        rate_deposit: f64,
        rate_interbank: f64,
        credit: f64,
        debt: f64,
    ) -> Result<()> {
        self.ensure_alive()?;
        self.cash = self.cash - rate_deposit * self.deposit - rate_interbank * debt
            + rate_interbank * credit;
        Ok(())
    }

    /// Freezes the bank. Fails if it has already defaulted.
    pub fn mark_default(&mut self, step: u64, economic_value: f64) -> Result<()> {
        if !self.alive {
            return Err(Error::AlreadyDefaulted {
                bank: self.id,
                step: self.default_time.unwrap_or_default(),
            });
        }
        self.alive = false;
        self.default_time = Some(step);
        self.frozen_value = Some(economic_value);
        Ok(())
    }

    pub(crate) fn ensure_alive(&self) -> Result<()> {
        if self.alive {
            Ok(())
        } else {
            Err(Error::AlreadyDefaulted {
                bank: self.id,
                step: self.default_time.unwrap_or_default(),
            })
        }
    }
}

/// Behavioural parameters of a bank's trading rule.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BankBehavior {
    /// Lower unresponsiveness threshold.
    pub theta1: f64,
    /// Upper unresponsiveness threshold.
    pub theta2: f64,
    /// Response slope. Positive for trend followers, negative for contrarians.
    pub a: f64,
    /// Decision uncertainty.
    pub sigma: f64,
}

impl BankBehavior {
    pub fn new(theta1: f64, theta2: f64, a: f64, sigma: f64) -> Result<Self> {
        let behavior = Self {
            theta1,
            theta2,
            a,
            sigma,
        };
        behavior.validate()?;
        Ok(behavior)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta1 < self.theta2) {
            return Err(Error::InvalidBehavior("theta1 must be strictly below theta2"));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidBehavior("sigma must be positive"));
        }
        Ok(())
    }

    pub fn is_trend_follower(&self) -> bool {
        self.a > 0.0
    }
}

pub fn financial_assets(asset_units: f64, price: f64) -> f64 {
    asset_units * price
}

pub fn equity(cash: f64, financial_assets: f64, credit: f64, debt: f64, deposit: f64) -> f64 {
    cash + financial_assets + credit - debt - deposit
}

/// Converts an annual rate to a per-step rate, `(1 + r)^(Δt/365) - 1`.
pub fn annual_to_step_rate(annual_rate: f64, dt_days: f64) -> Result<f64> {
    if !(annual_rate > -1.0) {
        return Err(Error::Domain("annual rate must exceed -1"));
    }
    if !(dt_days > 0.0) {
        return Err(Error::Domain("step length in days must be positive"));
    }
    // expm1/log1p keep precision for small rates.
    Ok(libm::expm1(dt_days / 365.0 * libm::log1p(annual_rate)))
}
