//! Step scheduler and Monte Carlo driver.
//!
//! One step runs, in order: attitude draws (ascending bank index, one
//! uniform each), order sizing, feasibility clamp at `S(t)`, price update,
//! settlement at `S(t)`, interest, mark-to-market at `S(t+Δt)` with the
//! solvency test, default resolution through the cascade, and the metrics
//! snapshot. Changing this order changes every output.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bank::{annual_to_step_rate, BankBehavior, BankState};
use crate::cascade::{run_cascade, total_losses};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::market::{
    clamp_feasible, draw_attitude, excess_demand, settle, trade_volume, MarketState, Order,
};
use crate::metrics::{self, alpha, totals, BankRatios, RunningStats, StepMetrics};
use crate::network::{ErdosRenyi, ExposureMatrix, NetworkGenerator};

/// Identifier of the random stream recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng::seed_from_u64";

/// What pushed a bank over the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DefaultTrigger {
    /// Failed the survival test after trading, interest and re-marking.
    Market,
    /// Failed because of losses on claims against defaulted banks.
    Contagion,
}

impl DefaultTrigger {
    pub fn as_str(self) -> &'static str {
        match self {
            DefaultTrigger::Market => "market",
            DefaultTrigger::Contagion => "contagion",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DefaultEvent {
    pub step: u64,
    pub bank: usize,
    pub trigger: DefaultTrigger,
    /// Cascade rounds needed to resolve this step's defaults.
    pub cascade_iterations: usize,
    /// Number of banks that defaulted in the same step.
    pub cascade_size: usize,
}

/// Balance sheet captured at the moment of default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenSheet {
    /// `C + J + K − L − D` with claims on fellow defaulters already lost.
    pub equity: f64,
    /// Economic value `C + J + K` at pre-cascade credit.
    pub economic_value: f64,
    pub ratios: BankRatios,
}

/// Per-step rates and constants derived from the configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub rate_deposit: f64,
    pub rate_interbank: f64,
    pub cear_c: f64,
}

impl StepParams {
    pub fn from_config(config: &SimConfig) -> Result<Self> {
        Ok(Self {
            rate_deposit: annual_to_step_rate(config.annual_deposit_rate, config.dt_days)?,
            rate_interbank: annual_to_step_rate(config.annual_interbank_rate, config.dt_days)?,
            cear_c: config.cear_c,
        })
    }
}

/// Everything one step reports besides the state change itself.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub metrics: StepMetrics,
    /// Executed orders (infeasible ones turned into waiting), one per bank.
    pub orders: Vec<Order>,
    pub excess_demand: f64,
    /// Price at which this step's trades settled.
    pub settlement_price: f64,
    pub new_defaults: Vec<DefaultEvent>,
}

/// Complete simulation state. Advancing it is deterministic.
#[derive(Debug, Clone)]
pub struct SimState {
    step: u64,
    banks: Vec<BankState>,
    behaviors: Vec<BankBehavior>,
    exposures: ExposureMatrix,
    credits: Vec<f64>,
    debts: Vec<f64>,
    market: MarketState,
    params: StepParams,
    frozen: Vec<Option<FrozenSheet>>,
    cumulative_loss: f64,
    rng: ChaCha20Rng,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, low: f64, high: f64) -> f64 {
    low + (high - low) * rng.random::<f64>()
}

impl SimState {
    /// Samples every bank in ascending index order (θ₁, θ₂, a, σ, C, n, D),
    /// then the lending network, from a generator seeded with `config.seed`.
    pub fn init(config: &SimConfig) -> Result<Self> {
        Self::init_inner(config, None)
    }

    /// Like [`SimState::init`], but uses `exposures` instead of generating
    /// the network. Bank draws are identical to `init` with the same seed.
    pub fn init_with_exposures(config: &SimConfig, exposures: ExposureMatrix) -> Result<Self> {
        Self::init_inner(config, Some(exposures))
    }

    fn init_inner(config: &SimConfig, exposures: Option<ExposureMatrix>) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let mut banks = Vec::with_capacity(config.n_banks);
        let mut behaviors = Vec::with_capacity(config.n_banks);
        for id in 0..config.n_banks {
            let theta1 = uniform(&mut rng, config.theta1_low, config.theta1_high);
            let theta2 = uniform(&mut rng, config.theta2_low, config.theta2_high);
            let a = uniform(&mut rng, config.a0, config.a0 + config.a_width);
            let sigma = uniform(&mut rng, config.sigma_low, config.sigma_high);
            let cash = uniform(&mut rng, config.cash_low, config.cash_high);
            let units = uniform(&mut rng, config.units_low, config.units_high);
            let deposit = uniform(&mut rng, config.deposit_low, config.deposit_high);
            behaviors.push(BankBehavior::new(theta1, theta2, a, sigma)?);
            banks.push(BankState::new(id, cash, units, deposit));
        }
        let exposures = match exposures {
            Some(w) => w,
            None => ErdosRenyi {
                avg_links: config.avg_links,
                weight_low: config.weight_low,
                weight_high: config.weight_high,
            }
            .generate(config.n_banks, &mut rng)?,
        };
        let market = MarketState::new(config.initial_price, config.gamma, config.eta);
        Self::with_rng(
            banks,
            behaviors,
            exposures,
            market,
            StepParams::from_config(config)?,
            rng,
        )
    }

    /// Assembles a state from explicit parts, e.g. for scenario tests.
    pub fn from_parts(
        banks: Vec<BankState>,
        behaviors: Vec<BankBehavior>,
        exposures: ExposureMatrix,
        market: MarketState,
        params: StepParams,
        seed: u64,
    ) -> Result<Self> {
        Self::with_rng(
            banks,
            behaviors,
            exposures,
            market,
            params,
            ChaCha20Rng::seed_from_u64(seed),
        )
    }

    fn with_rng(
        banks: Vec<BankState>,
        behaviors: Vec<BankBehavior>,
        exposures: ExposureMatrix,
        market: MarketState,
        params: StepParams,
        rng: ChaCha20Rng,
    ) -> Result<Self> {
        let n = banks.len();
        for len in [behaviors.len(), exposures.n_banks()] {
            if len != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: len,
                });
            }
        }
        for b in &behaviors {
            b.validate()?;
        }
        if !(market.price() > 0.0 && market.price().is_finite()) {
            return Err(Error::Domain("price must be positive and finite"));
        }
        let credits = exposures.credits();
        let debts = exposures.debts();
        Ok(Self {
            step: 0,
            frozen: vec![None; n],
            banks,
            behaviors,
            exposures,
            credits,
            debts,
            market,
            params,
            cumulative_loss: 0.0,
            rng,
        })
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn banks(&self) -> &[BankState] {
        &self.banks
    }

    pub fn behaviors(&self) -> &[BankBehavior] {
        &self.behaviors
    }

    pub fn exposures(&self) -> &ExposureMatrix {
        &self.exposures
    }

    pub fn market(&self) -> &MarketState {
        &self.market
    }

    pub fn params(&self) -> &StepParams {
        &self.params
    }

    /// `H(t)` over all banks defaulted so far.
    pub fn cumulative_loss(&self) -> f64 {
        self.cumulative_loss
    }

    pub fn frozen_sheet(&self, bank: usize) -> Option<&FrozenSheet> {
        self.frozen[bank].as_ref()
    }

    pub fn credit(&self, bank: usize) -> f64 {
        self.credits[bank]
    }

    pub fn debt(&self, bank: usize) -> f64 {
        self.debts[bank]
    }

    /// Equity of `bank` at the current price and exposures.
    pub fn equity(&self, bank: usize) -> f64 {
        self.banks[bank].equity(self.market.price(), self.credits[bank], self.debts[bank])
    }

    pub fn n_defaults(&self) -> usize {
        self.banks.iter().filter(|b| !b.is_alive()).count()
    }

    pub fn default_times(&self) -> Vec<Option<u64>> {
        self.banks.iter().map(BankState::default_time).collect()
    }

    pub fn alpha(&self) -> f64 {
        alpha(&self.behaviors)
    }

    /// Metrics of the current state, as recorded for step 0.
    pub fn snapshot(&self) -> StepMetrics {
        self.metrics(&vec![Order::WAIT; self.banks.len()], self.market.price())
    }

    fn ratios(&self, i: usize, order: &Order, settlement_price: f64) -> BankRatios {
        if let Some(sheet) = &self.frozen[i] {
            return sheet.ratios;
        }
        let b = &self.banks[i];
        let j = b.financial_assets(self.market.price());
        BankRatios {
            car_pct: metrics::car(b.cash, j, self.credits[i], self.debts[i], b.deposit()),
            cear_pct: metrics::cear(
                b.cash,
                j,
                self.credits[i],
                order.attitude.as_i8(),
                order.volume,
                settlement_price,
                self.params.cear_c,
                self.params.rate_interbank,
            ),
            alive: true,
        }
    }

    fn metrics(&self, orders: &[Order], settlement_price: f64) -> StepMetrics {
        let (total_cash, total_units) = totals(&self.banks);
        StepMetrics {
            step: self.step,
            price: self.market.price(),
            log_return: self.market.last_return,
            total_cash,
            total_units,
            cumulative_loss: self.cumulative_loss,
            n_defaults: self.n_defaults(),
            banks: (0..self.banks.len())
                .map(|i| self.ratios(i, &orders[i], settlement_price))
                .collect(),
        }
    }

    /// Advances the simulation by one step.
    pub fn step(&mut self) -> Result<StepReport> {
        let n = self.banks.len();
        let t = self.step + 1;
        let price = self.market.price();
        let last_return = self.market.last_return;

        let mut orders = vec![Order::WAIT; n];
        for (i, order) in orders.iter_mut().enumerate() {
            let bank = &self.banks[i];
            if !bank.is_alive() {
                continue;
            }
            let proposed = draw_attitude(last_return, &self.behaviors[i], &mut self.rng);
            let volume = trade_volume(
                bank.equity(price, self.credits[i], self.debts[i]),
                self.market.eta,
            );
            let attitude = clamp_feasible(proposed, volume, bank.cash, bank.asset_units, price);
            *order = Order { attitude, volume };
        }

        let excess = excess_demand(&orders);
        self.market.update_price(excess);
        let new_price = self.market.price();
        if !self.market.log_price().is_finite() || new_price.is_infinite() {
            return Err(Error::Invariant {
                step: t,
                message: format!(
                    "price left (0, inf): {price} -> {new_price} on excess demand {excess}"
                ),
            });
        }

        for (i, order) in orders.iter().enumerate() {
            let bank = &mut self.banks[i];
            if !bank.is_alive() {
                continue;
            }
            settle(bank, order, price, t)?;
            bank.apply_interest(
                self.params.rate_deposit,
                self.params.rate_interbank,
                self.credits[i],
                self.debts[i],
            )?;
            if bank.asset_units < 0.0 {
                return Err(Error::Ledger {
                    step: t,
                    bank: i,
                    message: format!("negative holdings {}", bank.asset_units),
                });
            }
        }

        let equity: Vec<f64> = (0..n)
            .map(|i| {
                let b = &self.banks[i];
                if b.is_alive() {
                    b.equity(new_price, self.credits[i], self.debts[i])
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let market_defaults: Vec<usize> = (0..n).filter(|&i| equity[i] <= 0.0).collect();

        let new_defaults = if market_defaults.is_empty() {
            Vec::new()
        } else {
            self.resolve_defaults(t, market_defaults, equity, &orders, price)?
        };

        self.step = t;
        Ok(StepReport {
            metrics: self.metrics(&orders, price),
            orders,
            excess_demand: excess,
            settlement_price: price,
            new_defaults,
        })
    }

    /// Runs the cascade seeded by this step's market defaults, freezes every
    /// failed bank and writes off its exposures.
    fn resolve_defaults(
        &mut self,
        t: u64,
        market_defaults: Vec<usize>,
        mut equity: Vec<f64>,
        orders: &[Order],
        settlement_price: f64,
    ) -> Result<Vec<DefaultEvent>> {
        let price = self.market.price();
        let mut failed: Vec<(usize, DefaultTrigger)> = market_defaults
            .iter()
            .map(|&i| (i, DefaultTrigger::Market))
            .collect();
        let mut seeds = market_defaults;
        let mut working = self.exposures.clone();
        let mut iterations = 0;

        loop {
            let result = run_cascade(&working, &equity, &seeds)?;
            iterations += result.iterations;
            for i in result.defaulted_indices() {
                if equity[i].is_finite() && !seeds.contains(&i) {
                    failed.push((i, DefaultTrigger::Contagion));
                }
                equity[i] = f64::INFINITY;
            }
            working = result.updated_exposures;
            // A survivor whose loss exactly matched its equity passes the
            // strict cascade threshold but fails the survival test.
            seeds.clear();
            for (i, e) in equity.iter_mut().enumerate() {
                if e.is_finite() {
                    *e = self.banks[i].equity(price, working.credit(i), self.debts[i]);
                    if *e <= 0.0 {
                        seeds.push(i);
                    }
                }
            }
            if seeds.is_empty() {
                break;
            }
            failed.extend(seeds.iter().map(|&i| (i, DefaultTrigger::Contagion)));
        }

        let cascade_size = failed.len();
        let mut events = Vec::with_capacity(cascade_size);
        for &(i, trigger) in &failed {
            let bank = &self.banks[i];
            let j = bank.financial_assets(price);
            let credit_after = working.credit(i);
            let order = &orders[i];
            let sheet = FrozenSheet {
                equity: bank.equity(price, credit_after, self.debts[i]),
                economic_value: bank.economic_value(price, self.credits[i]),
                ratios: BankRatios {
                    car_pct: metrics::car(bank.cash, j, credit_after, self.debts[i], bank.deposit()),
                    cear_pct: metrics::cear(
                        bank.cash,
                        j,
                        credit_after,
                        order.attitude.as_i8(),
                        order.volume,
                        settlement_price,
                        self.params.cear_c,
                        self.params.rate_interbank,
                    ),
                    alive: false,
                },
            };
            self.banks[i].mark_default(t, sheet.economic_value)?;
            self.frozen[i] = Some(sheet);
            events.push(DefaultEvent {
                step: t,
                bank: i,
                trigger,
                cascade_iterations: iterations,
                cascade_size,
            });
        }
        events.sort_by_key(|e| e.bank);

        let ids: Vec<usize> = failed.iter().map(|&(i, _)| i).collect();
        self.exposures.write_off_defaults(&ids)?;
        self.credits = self.exposures.credits();
        self.debts = self.exposures.debts();

        let flags: Vec<bool> = self.banks.iter().map(|b| !b.is_alive()).collect();
        let values: Vec<f64> = self
            .banks
            .iter()
            .map(|b| b.frozen_value().unwrap_or(0.0))
            .collect();
        self.cumulative_loss = total_losses(&flags, &values)?.total;
        Ok(events)
    }
}

/// Full record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: SimConfig,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    /// Realized fraction of trend followers.
    pub alpha: f64,
    /// `horizon_steps + 1` rows, starting with the initial state.
    pub steps: Vec<StepMetrics>,
    pub events: Vec<DefaultEvent>,
    pub default_times: Vec<Option<u64>>,
}

impl RunRecord {
    pub fn outcome(&self) -> RunOutcome {
        let mut returns = RunningStats::default();
        for m in self.steps.iter().skip(1) {
            returns.push(m.log_return);
        }
        let last = self.steps.last().expect("a run has at least one row");
        RunOutcome {
            seed: self.seed,
            alpha: self.alpha,
            default_times: self.default_times.clone(),
            final_loss: last.cumulative_loss,
            n_defaults: last.n_defaults,
            return_volatility: returns.std_dev(),
            final_price: last.price,
        }
    }
}

/// Runs `config.horizon_steps` steps, handing every report to `observe`.
/// Returns the final state.
pub fn run_with<F>(config: &SimConfig, mut observe: F) -> Result<SimState>
where
    F: FnMut(&SimState, &StepReport),
{
    let mut state = SimState::init(config)?;
    for _ in 0..config.horizon_steps {
        let report = state.step()?;
        observe(&state, &report);
    }
    Ok(state)
}

/// Runs one simulation and keeps the full time series.
pub fn run(config: &SimConfig) -> Result<RunRecord> {
    let initial = SimState::init(config)?;
    let mut steps = Vec::with_capacity(config.horizon_steps as usize + 1);
    steps.push(initial.snapshot());
    let mut events = Vec::new();
    let state = run_with(config, |_, report| {
        steps.push(report.metrics.clone());
        events.extend_from_slice(&report.new_defaults);
    })?;
    Ok(RunRecord {
        config: config.clone(),
        seed: config.seed,
        rng_algorithm: RNG_ALGORITHM,
        alpha: state.alpha(),
        steps,
        events,
        default_times: state.default_times(),
    })
}

/// Scalar summary of one run, enough for ensemble statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunOutcome {
    pub seed: u64,
    pub alpha: f64,
    pub default_times: Vec<Option<u64>>,
    /// `H(T)`.
    pub final_loss: f64,
    pub n_defaults: usize,
    /// Sample standard deviation of the per-step log returns.
    pub return_volatility: f64,
    pub final_price: f64,
}

/// Runs one simulation without keeping its time series.
pub fn simulate_outcome(config: &SimConfig) -> Result<RunOutcome> {
    let mut returns = RunningStats::default();
    let state = run_with(config, |_, report| returns.push(report.metrics.log_return))?;
    Ok(RunOutcome {
        seed: config.seed,
        alpha: state.alpha(),
        default_times: state.default_times(),
        final_loss: state.cumulative_loss(),
        n_defaults: state.n_defaults(),
        return_volatility: returns.std_dev(),
        final_price: state.market().price(),
    })
}

/// Location summary of an ensemble quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Distribution {
    pub mean: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Distribution {
    /// Linear-interpolation quantiles; `values` must be non-empty.
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let lo = libm::floor(pos) as usize;
            let hi = libm::ceil(pos) as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        };
        Self {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            min: sorted[0],
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// Aggregated Monte Carlo results.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleSummary {
    pub runs: usize,
    pub horizon: u64,
    /// Per-bank relative default frequency by the horizon.
    pub default_probability: Vec<f64>,
    pub systemic_k: usize,
    /// Fraction of runs with at least `systemic_k` defaults.
    pub systemic_default_probability: f64,
    pub final_loss: Distribution,
    pub n_defaults: Distribution,
    pub return_volatility: Distribution,
    pub alpha: Distribution,
    /// Per-run outcomes, ordered by seed.
    pub outcomes: Vec<RunOutcome>,
}

impl EnsembleSummary {
    /// Reduces run outcomes. The result does not depend on their order.
    pub fn from_outcomes(
        mut outcomes: Vec<RunOutcome>,
        horizon: u64,
        systemic_k: usize,
    ) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Domain("an ensemble needs at least one run"));
        }
        outcomes.sort_by(|a, b| {
            a.seed
                .cmp(&b.seed)
                .then(a.final_loss.total_cmp(&b.final_loss))
        });
        let n_banks = outcomes[0].default_times.len();
        if let Some(bad) = outcomes.iter().find(|o| o.default_times.len() != n_banks) {
            return Err(Error::Dimension {
                expected: n_banks,
                actual: bad.default_times.len(),
            });
        }
        let times = || outcomes.iter().map(|o| o.default_times.as_slice());
        let default_probability = (0..n_banks)
            .map(|i| metrics::default_probability(times(), i, horizon))
            .collect();
        let systemic = metrics::systemic_default_probability(times(), systemic_k, horizon);
        let collect = |f: fn(&RunOutcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
        Ok(Self {
            runs: outcomes.len(),
            horizon,
            default_probability,
            systemic_k,
            systemic_default_probability: systemic,
            final_loss: Distribution::from_values(&collect(|o| o.final_loss)),
            n_defaults: Distribution::from_values(&collect(|o| o.n_defaults as f64)),
            return_volatility: Distribution::from_values(&collect(|o| o.return_volatility)),
            alpha: Distribution::from_values(&collect(|o| o.alpha)),
            outcomes,
        })
    }
}

/// Seeds `base_seed .. base_seed + m_sim` in ensemble order.
pub fn ensemble_seeds(base_seed: u64, m_sim: usize) -> impl Iterator<Item = u64> {
    (0..m_sim as u64).map(move |k| base_seed.wrapping_add(k))
}

/// Runs `m_sim` independent simulations sequentially and aggregates them.
pub fn monte_carlo(config: &SimConfig, m_sim: usize, base_seed: u64) -> Result<EnsembleSummary> {
    if m_sim == 0 {
        return Err(Error::Domain("an ensemble needs at least one run"));
    }
    let outcomes = ensemble_seeds(base_seed, m_sim)
        .map(|seed| {
            simulate_outcome(&SimConfig {
                seed,
                ..config.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleSummary::from_outcomes(outcomes, config.horizon_steps, config.systemic_k)
}
