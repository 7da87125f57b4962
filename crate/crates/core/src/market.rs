//! Single risky-asset market driven by the banks' own excess demand.

use alloc::format;

use rand::Rng;

use crate::bank::{BankBehavior, BankState};
use crate::error::{Error, Result};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Price and price-formation constants.
///
/// The price is carried as `S(0)·exp(g)`, where `g` is the sum of all
/// realized log returns, so it stays strictly positive whatever the demand
/// path. After an extreme crash `exp(g)` leaves the `f64` range, so
/// [`MarketState::price`] is floored at `f64::MIN_POSITIVE`;
/// [`MarketState::log_price`] stays exact.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarketState {
    reference_price: f64,
    log_growth: f64,
    /// Log return realized by the last price update.
    pub last_return: f64,
    /// Price impact per unit of excess demand.
    pub gamma: f64,
    /// Fraction of equity committed per order.
    pub eta: f64,
}

impl MarketState {
    /// `price` must be positive and finite.
    pub fn new(price: f64, gamma: f64, eta: f64) -> Self {
        Self {
            reference_price: price,
            log_growth: 0.0,
            last_return: 0.0,
            gamma,
            eta,
        }
    }

    /// `S(t)`, never below `f64::MIN_POSITIVE`.
    pub fn price(&self) -> f64 {
        (self.reference_price * libm::exp(self.log_growth)).max(f64::MIN_POSITIVE)
    }

    /// `log S(t)`.
    pub fn log_price(&self) -> f64 {
        libm::log(self.reference_price) + self.log_growth
    }

    /// Cumulative log return since the start, `log S(t) − log S(0)`.
    pub fn log_growth(&self) -> f64 {
        self.log_growth
    }

    /// `S ← S·exp(γ·excess)`; the realized log return `γ·excess` becomes the
    /// signal for the next round of decisions.
    pub fn update_price(&mut self, excess: f64) {
        let r = self.gamma * excess;
        self.log_growth += r;
        self.last_return = r;
    }
}

/// Investment attitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Attitude {
    Sell = -1,
    #[default]
    Wait = 0,
    Buy = 1,
}

impl Attitude {
    pub fn sign(self) -> f64 {
        f64::from(self as i8)
    }

    pub fn as_i8(self) -> i8 {
        self as i8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Order {
    pub attitude: Attitude,
    /// Units of the asset, never negative.
    pub volume: f64,
}

impl Order {
    pub const WAIT: Order = Order {
        attitude: Attitude::Wait,
        volume: 0.0,
    };

    /// Signed demand `y·V`.
    pub fn demand(&self) -> f64 {
        self.attitude.sign() * self.volume
    }
}

/// Largest perturbation applied to a probability to keep it off the
/// boundary of `(0, 1)`.
const INTERIOR_MARGIN: f64 = 1.0 / (1u64 << 30) as f64;

/// `½ erfc(x)`, kept strictly inside `(0, 1)` in floating point.
///
/// For `x < 0` the value is `1 - q` with `q = ½ erfc(-x)`. It is evaluated as
/// `1 - (q + min(q, m, ½ - q))`, rounded down, with `m = 2⁻³⁰`: continuous
/// at `x = 0`, monotone, and leaving at least `min(q, m)` of room for the
/// opposite tail, so `p⁺ + p⁻ < 1` survives rounding.
fn interior_half_erfc(x: f64) -> f64 {
    if x >= 0.0 {
        return (0.5 * libm::erfc(x)).max(f64::MIN_POSITIVE);
    }
    let q = (0.5 * libm::erfc(-x)).max(f64::MIN_POSITIVE);
    let s = q + q.min(INTERIOR_MARGIN).min((0.5 - q).max(0.0));
    let p = 1.0 - s;
    // 1 - p is exact for p in [0.5, 1].
    if 1.0 - p < s {
        p.next_down()
    } else {
        p
    }
}

/// `p⁺(R) = ½ erfc((θ₂ − aR) / (√2 σ))`.
pub fn prob_buy(last_return: f64, b: &BankBehavior) -> f64 {
    interior_half_erfc((b.theta2 - b.a * last_return) / (SQRT_2 * b.sigma))
}

/// `p⁻(R) = ½ erfc((aR − θ₁) / (√2 σ))`.
pub fn prob_sell(last_return: f64, b: &BankBehavior) -> f64 {
    interior_half_erfc((b.a * last_return - b.theta1) / (SQRT_2 * b.sigma))
}

/// Draws one attitude using exactly one uniform variate: `[0, p⁺)` buys,
/// `[p⁺, p⁺ + p⁻)` sells, the rest waits.
pub fn draw_attitude<R: Rng + ?Sized>(last_return: f64, b: &BankBehavior, rng: &mut R) -> Attitude {
    let u: f64 = rng.random();
    let p_buy = prob_buy(last_return, b);
    if u < p_buy {
        Attitude::Buy
    } else if u < p_buy + prob_sell(last_return, b) {
        Attitude::Sell
    } else {
        Attitude::Wait
    }
}

/// Order size `max(0, η·E)`.
pub fn trade_volume(equity: f64, eta: f64) -> f64 {
    (eta * equity).max(0.0)
}

/// Turns an order the bank cannot execute at `price` into waiting. Buying
/// needs `C >= V·S`, selling needs `n >= V`.
pub fn clamp_feasible(attitude: Attitude, volume: f64, cash: f64, asset_units: f64, price: f64) -> Attitude {
    match attitude {
        Attitude::Buy if cash < volume * price => Attitude::Wait,
        Attitude::Sell if asset_units < volume => Attitude::Wait,
        a => a,
    }
}

/// `Σ V_i·y_i`.
pub fn excess_demand<'a, I>(orders: I) -> f64
where
    I: IntoIterator<Item = &'a Order>,
{
    orders.into_iter().map(Order::demand).sum()
}

/// Executes a feasible order at `price`.
pub fn settle(bank: &mut BankState, order: &Order, price: f64, step: u64) -> Result<()> {
    if order.attitude == Attitude::Wait {
        return Ok(());
    }
    bank.ensure_alive()?;
    let notional = order.volume * price;
    match order.attitude {
        Attitude::Buy => {
            if bank.cash < notional {
                return Err(Error::Ledger {
                    step,
                    bank: bank.id,
                    message: format!("buy of {notional} exceeds cash {}", bank.cash),
                });
            }
            bank.cash -= notional;
            bank.asset_units += order.volume;
        }
        Attitude::Sell => {
            if bank.asset_units < order.volume {
                return Err(Error::Ledger {
                    step,
                    bank: bank.id,
                    message: format!(
                        "sell of {} units exceeds holdings {}",
                        order.volume, bank.asset_units
                    ),
                });
            }
            bank.cash += notional;
            bank.asset_units -= order.volume;
        }
        Attitude::Wait => unreachable!(),
    }
    Ok(())
}
