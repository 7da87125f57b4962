//! Simulation parameters. Defaults reproduce the reference parameter table
//! (100 banks, 6 links on average, 1% / 5% annual rates, η = 0.001, γ = 0.1).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, FieldError, Result};

/// Every parameter of one simulation run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct SimConfig {
    pub n_banks: usize,
    pub horizon_steps: u64,
    pub dt_days: f64,
    pub seed: u64,
    /// Lower bound of the response-slope distribution `U(a0, a0 + a_width)`.
    pub a0: f64,
    pub a_width: f64,
    pub theta1_low: f64,
    pub theta1_high: f64,
    pub theta2_low: f64,
    pub theta2_high: f64,
    pub sigma_low: f64,
    pub sigma_high: f64,
    pub cash_low: f64,
    pub cash_high: f64,
    pub units_low: f64,
    pub units_high: f64,
    pub deposit_low: f64,
    pub deposit_high: f64,
    pub weight_low: f64,
    pub weight_high: f64,
    pub avg_links: f64,
    pub annual_deposit_rate: f64,
    pub annual_interbank_rate: f64,
    pub eta: f64,
    pub gamma: f64,
    /// Operational-risk constant in the CEAR denominator.
    pub cear_c: f64,
    pub initial_price: f64,
    /// Monte Carlo repetitions.
    pub m_sim: usize,
    /// Minimum number of defaults counted as a systemic event.
    pub systemic_k: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_banks: 100,
            horizon_steps: 36_500,
            dt_days: 1.0,
            seed: 1,
            a0: -1.0,
            a_width: 2.1,
            theta1_low: -1.0,
            theta1_high: -0.3,
            theta2_low: 0.3,
            theta2_high: 1.0,
            sigma_low: 3.0,
            sigma_high: 4.0,
            cash_low: 2000.0,
            cash_high: 3000.0,
            units_low: 2000.0,
            units_high: 3000.0,
            deposit_low: 100.0,
            deposit_high: 200.0,
            weight_low: 100.0,
            weight_high: 500.0,
            avg_links: 6.0,
            annual_deposit_rate: 0.01,
            annual_interbank_rate: 0.05,
            eta: 0.001,
            gamma: 0.1,
            cear_c: 0.5,
            initial_price: 1.0,
            m_sim: 100,
            systemic_k: 1,
        }
    }
}

/// Names accepted by [`SimConfig::set_field`], in declaration order.
pub const FIELD_NAMES: &[&str] = &[
    "n_banks",
    "horizon_steps",
    "dt_days",
    "seed",
    "a0",
    "a_width",
    "theta1_low",
    "theta1_high",
    "theta2_low",
    "theta2_high",
    "sigma_low",
    "sigma_high",
    "cash_low",
    "cash_high",
    "units_low",
    "units_high",
    "deposit_low",
    "deposit_high",
    "weight_low",
    "weight_high",
    "avg_links",
    "annual_deposit_rate",
    "annual_interbank_rate",
    "eta",
    "gamma",
    "cear_c",
    "initial_price",
    "m_sim",
    "systemic_k",
];

fn parse<T: core::str::FromStr>(field: &'static str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| {
        Error::Config(alloc::vec![FieldError {
            field,
            message: format!("cannot parse {value:?}"),
        }])
    })
}

impl SimConfig {
    /// Expected fraction of trend followers, `P(a > 0)` under `U(a0, a0 + a_width)`.
    pub fn expected_alpha(&self) -> f64 {
        if self.a_width <= 0.0 {
            return if self.a0 > 0.0 { 1.0 } else { 0.0 };
        }
        ((self.a0 + self.a_width) / self.a_width).clamp(0.0, 1.0)
    }

    /// Sets one parameter from its textual value.
    pub fn set_field(&mut self, name: &str, value: &str) -> Result<()> {
        macro_rules! dispatch {
            ($($f:ident),* $(,)?) => {
                match name {
                    $(stringify!($f) => self.$f = parse(stringify!($f), value)?,)*
                    _ => {
                        return Err(Error::Config(alloc::vec![FieldError {
                            field: "key",
                            message: format!("unknown parameter {name:?}"),
                        }]))
                    }
                }
            };
        }
        dispatch!(
            n_banks, horizon_steps, dt_days, seed, a0, a_width, theta1_low, theta1_high,
            theta2_low, theta2_high, sigma_low, sigma_high, cash_low, cash_high, units_low,
            units_high, deposit_low, deposit_high, weight_low, weight_high, avg_links,
            annual_deposit_rate, annual_interbank_rate, eta, gamma, cear_c, initial_price,
            m_sim, systemic_k,
        );
        Ok(())
    }

    /// Checks every constraint and reports all offending fields at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors: Vec<FieldError> = Vec::new();
        let mut fail = |field: &'static str, message: String| {
            errors.push(FieldError { field, message })
        };

        if self.n_banks == 0 {
            fail("n_banks", "must be at least 1".into());
        }
        if !(self.dt_days > 0.0 && self.dt_days.is_finite()) {
            fail("dt_days", "must be positive".into());
        }
        if !self.a0.is_finite() {
            fail("a0", "must be finite".into());
        }
        if !(self.a_width >= 0.0 && self.a_width.is_finite()) {
            fail("a_width", "must be non-negative".into());
        }
        let ranges: [(&'static str, f64, f64); 8] = [
            ("theta1", self.theta1_low, self.theta1_high),
            ("theta2", self.theta2_low, self.theta2_high),
            ("sigma", self.sigma_low, self.sigma_high),
            ("cash", self.cash_low, self.cash_high),
            ("units", self.units_low, self.units_high),
            ("deposit", self.deposit_low, self.deposit_high),
            ("weight", self.weight_low, self.weight_high),
            ("a", self.a0, self.a0 + self.a_width),
        ];
        for (name, low, high) in ranges {
            if !(low.is_finite() && high.is_finite() && low <= high) {
                fail(name, format!("bounds must be finite with low <= high (got {low}, {high})"));
            }
        }
        if !(self.theta1_high < self.theta2_low) {
            fail("theta1_high", "must lie strictly below theta2_low".into());
        }
        if !(self.sigma_low > 0.0) {
            fail("sigma_low", "sigma must be positive".into());
        }
        if !(self.cash_low > 0.0) {
            fail("cash_low", "initial cash must be positive".into());
        }
        if !(self.units_low > 0.0) {
            fail("units_low", "initial holdings must be positive".into());
        }
        if !(self.deposit_low >= 0.0) {
            fail("deposit_low", "deposits must be non-negative".into());
        }
        if !(self.weight_low >= 0.0) {
            fail("weight_low", "exposures must be non-negative".into());
        }
        let max_links = self.n_banks.saturating_sub(1) as f64;
        if !(self.avg_links >= 0.0 && self.avg_links <= max_links) {
            fail("avg_links", format!("must lie in [0, n_banks - 1] = [0, {max_links}]"));
        }
        if !(self.annual_deposit_rate > -1.0 && self.annual_deposit_rate.is_finite()) {
            fail("annual_deposit_rate", "must exceed -1".into());
        }
        if !(self.annual_interbank_rate > -1.0 && self.annual_interbank_rate.is_finite()) {
            fail("annual_interbank_rate", "must exceed -1".into());
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            fail("eta", "eta must lie in (0,1]".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            fail("gamma", "gamma must be positive".into());
        }
        if !(self.cear_c > 0.0 && self.cear_c < 1.0) {
            fail("cear_c", "cear_c must lie in (0,1)".into());
        }
        if !(self.initial_price > 0.0 && self.initial_price.is_finite()) {
            fail("initial_price", "must be positive".into());
        }
        if self.m_sim == 0 {
            fail("m_sim", "must be at least 1".into());
        }
        if self.systemic_k == 0 || self.systemic_k > self.n_banks.max(1) {
            fail("systemic_k", "must lie in [1, n_banks]".to_string());
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SimConfig::default();
        c.validate().unwrap();
        assert_eq!(c.n_banks, 100);
        assert_eq!(c.eta, 0.001);
        assert_eq!(c.gamma, 0.1);
        assert_eq!(c.avg_links, 6.0);
        assert_eq!((c.annual_deposit_rate, c.annual_interbank_rate), (0.01, 0.05));
    }

    #[test]
    fn eta_out_of_range() {
        let c = SimConfig {
            eta: 1.5,
            ..SimConfig::default()
        };
        match c.validate() {
            Err(Error::Config(errs)) => {
                assert_eq!(errs.len(), 1);
                assert_eq!(errs[0].field, "eta");
                assert!(errs[0].message.contains("eta must lie in (0,1]"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_reported() {
        let c = SimConfig {
            eta: 0.0,
            gamma: -1.0,
            cash_low: 5000.0,
            ..SimConfig::default()
        };
        let Err(Error::Config(errs)) = c.validate() else {
            panic!("expected config error")
        };
        let fields: Vec<_> = errs.iter().map(|e| e.field).collect();
        assert!(fields.contains(&"eta"));
        assert!(fields.contains(&"gamma"));
        assert!(fields.contains(&"cash"));
    }

    #[test]
    fn set_field_by_name() {
        let mut c = SimConfig::default();
        c.set_field("a0", "-1.05").unwrap();
        c.set_field("n_banks", "12").unwrap();
        assert_eq!(c.a0, -1.05);
        assert_eq!(c.n_banks, 12);
        assert!(c.set_field("n_banks", "1.5").is_err());
        assert!(c.set_field("nbanks", "3").is_err());
        for name in FIELD_NAMES {
            let mut c = SimConfig::default();
            assert!(c.set_field(name, "1").is_ok(), "{name}");
        }
    }

    #[test]
    fn expected_alpha_values() {
        let at = |a0: f64| SimConfig { a0, ..SimConfig::default() }.expected_alpha();
        assert!((at(-1.05) - 0.5).abs() < 1e-12);
        assert!((at(-1.0) - 0.5238).abs() < 1e-4);
        assert!((at(-0.45) - 0.7857).abs() < 1e-4);
        assert_eq!(at(-3.0), 0.0);
        assert_eq!(at(0.5), 1.0);
    }
}
