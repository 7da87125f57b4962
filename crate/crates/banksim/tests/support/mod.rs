#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(dead_code)]

use std::time::{Duration, Instant};

use banksim_core::bank::equity;
use banksim_core::market::Attitude;
use banksim_core::metrics::RunningStats;
use banksim_core::{ExposureMatrix, SimConfig, SimState};
use rand::seq::SliceRandom;
use rand::Rng;

/// Everything a checked run observed.
#[derive(Debug, Default)]
pub struct CheckedRun {
    pub seed: u64,
    pub steps: u64,
    pub alpha: f64,
    pub volatility: f64,
    pub final_loss: f64,
    pub n_defaults: usize,
    pub min_price: f64,
    pub step_time: Duration,
    /// Bank-steps whose cash and holdings were re-derived.
    pub ledger_checks: u64,
    /// Bank-steps checked for the default/equity/CAR sign identity.
    pub sign_checks: u64,
    pub ledger_violations: Vec<String>,
    pub sign_violations: Vec<String>,
}

fn note(list: &mut Vec<String>, msg: String) {
    if list.len() < 20 {
        list.push(msg);
    }
}

/// Runs `config`, re-deriving every bank's cash and holdings, the price path
/// and the solvency flags from the previous state and the executed orders.
pub fn checked_run(config: &SimConfig) -> CheckedRun {
    let mut state = SimState::init(config).expect("valid config");
    let n = config.n_banks;
    let params = *state.params();
    let gamma = state.market().gamma;
    let eta = state.market().eta;
    let mut out = CheckedRun {
        seed: config.seed,
        alpha: state.alpha(),
        min_price: state.market().price(),
        ..CheckedRun::default()
    };
    let mut returns = RunningStats::default();
    let mut prev_loss = 0.0;
    let mut prev_defaults = 0;

    for _ in 0..config.horizon_steps {
        let before = state.banks().to_vec();
        let credit: Vec<f64> = (0..n).map(|i| state.credit(i)).collect();
        let debt: Vec<f64> = (0..n).map(|i| state.debt(i)).collect();
        let growth = state.market().log_growth();
        let price = state.market().price();

        let started = Instant::now();
        let report = state.step().expect("step");
        out.step_time += started.elapsed();
        let t = report.metrics.step;
        let l = &mut out.ledger_violations;

        if report.settlement_price != price {
            note(l, format!("t={t}: settled at {} not {price}", report.settlement_price));
        }
        let excess: f64 = report
            .orders
            .iter()
            .map(|o| match o.attitude {
                Attitude::Buy => o.volume,
                Attitude::Sell => -o.volume,
                Attitude::Wait => 0.0,
            })
            .sum();
        if excess != report.excess_demand {
            note(l, format!("t={t}: excess {excess} vs {}", report.excess_demand));
        }
        if state.market().log_growth() != growth + gamma * excess {
            note(
                l,
                format!(
                    "t={t}: log price moved by {} for excess {excess}",
                    state.market().log_growth() - growth
                ),
            );
        }
        let new_price = state.market().price();
        if !(new_price > 0.0 && new_price.is_finite()) {
            note(l, format!("t={t}: price {new_price}"));
        }
        out.min_price = out.min_price.min(new_price);

        for (i, (old, new)) in before.iter().zip(state.banks()).enumerate() {
            if new.asset_units < 0.0 {
                note(l, format!("t={t} bank {i}: holdings {}", new.asset_units));
            }
            let order = report.orders[i];
            if !old.is_alive() {
                if order.attitude != Attitude::Wait
                    || new.cash != old.cash
                    || new.asset_units != old.asset_units
                {
                    note(l, format!("t={t} bank {i}: dead bank changed"));
                }
                continue;
            }
            let e = equity(old.cash, old.asset_units * price, credit[i], debt[i], old.deposit());
            let volume = (eta * e).max(0.0);
            if order.volume != volume {
                note(l, format!("t={t} bank {i}: volume {} vs {volume}", order.volume));
            }
            let notional = order.volume * price;
            let (cash, units) = match order.attitude {
                Attitude::Buy => {
                    if old.cash < notional {
                        note(l, format!("t={t} bank {i}: overdrawn buy"));
                    }
                    (old.cash - notional, old.asset_units + order.volume)
                }
                Attitude::Sell => {
                    if old.asset_units < order.volume {
                        note(l, format!("t={t} bank {i}: short sale"));
                    }
                    (old.cash + notional, old.asset_units - order.volume)
                }
                Attitude::Wait => (old.cash, old.asset_units),
            };
            let cash = cash - params.rate_deposit * old.deposit() - params.rate_interbank * debt[i]
                + params.rate_interbank * credit[i];
            if new.cash != cash || new.asset_units != units {
                note(
                    l,
                    format!(
                        "t={t} bank {i}: cash {} units {} expected {cash} {units}",
                        new.cash, new.asset_units
                    ),
                );
            }
            out.ledger_checks += 1;
        }

        for row in state.exposures().rows() {
            if row.iter().any(|&x| !(x >= 0.0)) {
                note(l, format!("t={t}: negative exposure"));
            }
        }
        let m = &report.metrics;
        if m.cumulative_loss < prev_loss || m.n_defaults < prev_defaults {
            note(l, format!("t={t}: H or default count decreased"));
        }
        prev_loss = m.cumulative_loss;
        prev_defaults = m.n_defaults;

        // Defaulted at t <=> equity <= 0 at t <=> CAR <= 0 at t.
        let s = &mut out.sign_violations;
        for e in &report.new_defaults {
            let sheet = state.frozen_sheet(e.bank).expect("frozen sheet");
            let car = m.banks[e.bank].car_pct;
            if !(sheet.equity <= 0.0) || car.is_some_and(|c| !(c <= 0.0)) {
                note(
                    s,
                    format!("t={t} bank {}: defaulted with equity {} CAR {car:?}", e.bank, sheet.equity),
                );
            }
            out.sign_checks += 1;
        }
        for (i, b) in state.banks().iter().enumerate() {
            if b.is_alive() {
                let car = m.banks[i].car_pct;
                if !(state.equity(i) > 0.0) || car.is_some_and(|c| !(c > 0.0)) {
                    note(
                        s,
                        format!("t={t} bank {i}: alive with equity {} CAR {car:?}", state.equity(i)),
                    );
                }
                out.sign_checks += 1;
            }
        }
        returns.push(m.log_return);
    }
    out.steps = config.horizon_steps;
    out.volatility = returns.std_dev();
    out.final_loss = state.cumulative_loss();
    out.n_defaults = state.n_defaults();
    out
}

/// Reference cascade: single banks examined in random order until a full
/// pass changes nothing. Returns final flags and losses.
pub fn cascade_oracle<R: Rng>(
    w: &ExposureMatrix,
    equity: &[f64],
    initial: &[usize],
    rng: &mut R,
) -> (Vec<bool>, Vec<f64>) {
    let n = w.n_banks();
    let mut defaulted = vec![false; n];
    for &d in initial {
        defaulted[d] = true;
    }
    let loss = |defaulted: &[bool], i: usize| -> f64 {
        (0..n).filter(|&j| defaulted[j]).map(|j| w.get(i, j)).sum()
    };
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        order.shuffle(rng);
        let mut changed = false;
        for &i in &order {
            if !defaulted[i] && loss(&defaulted, i) > equity[i] {
                defaulted[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let q = (0..n).map(|i| loss(&defaulted, i)).collect();
    (defaulted, q)
}
