//! Parallel Monte Carlo ensembles and parameter sweeps.

use std::path::Path;

use banksim_core::engine::ensemble_seeds;
use banksim_core::{simulate_outcome, EnsembleSummary, SimConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::config_hash;
use crate::error::CliError;
use crate::output::{create_dir, open_csv, write_json, FORMAT_VERSION};

pub const ENSEMBLE_FILE: &str = "ensemble.json";
pub const OUTCOMES_FILE: &str = "outcomes.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Runs seeds `base_seed .. base_seed + runs` concurrently. The result is
/// identical to the sequential driver.
pub fn run_ensemble(
    config: &SimConfig,
    runs: usize,
    base_seed: u64,
) -> Result<EnsembleSummary, CliError> {
    if runs == 0 {
        return Err(CliError::Config("an ensemble needs at least one run".into()));
    }
    config.validate()?;
    let seeds: Vec<u64> = ensemble_seeds(base_seed, runs).collect();
    let outcomes = seeds
        .par_iter()
        .map(|&seed| {
            simulate_outcome(&SimConfig {
                seed,
                ..config.clone()
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleSummary::from_outcomes(
        outcomes,
        config.horizon_steps,
        config.systemic_k,
    )?)
}

#[derive(Debug, Serialize)]
struct EnsembleDocument<'a> {
    format_version: &'a str,
    base_seed: u64,
    rng_algorithm: &'a str,
    config_hash: &'a str,
    config: &'a SimConfig,
    summary: &'a EnsembleSummary,
}

/// Writes `ensemble.json` and the per-run `outcomes.csv`.
pub fn write_ensemble(
    dir: &Path,
    config: &SimConfig,
    base_seed: u64,
    summary: &EnsembleSummary,
) -> Result<(), CliError> {
    create_dir(dir)?;
    let hash = config_hash(config);
    let mut outcomes = open_csv(
        dir,
        OUTCOMES_FILE,
        base_seed,
        &hash,
        &["seed", "alpha", "return_volatility", "H", "n_defaults", "final_price"],
    )?;
    for o in &summary.outcomes {
        outcomes.row((
            o.seed,
            o.alpha,
            o.return_volatility,
            o.final_loss,
            o.n_defaults,
            o.final_price,
        ))?;
    }
    outcomes.finish()?;
    write_json(
        &dir.join(ENSEMBLE_FILE),
        &EnsembleDocument {
            format_version: FORMAT_VERSION,
            base_seed,
            rng_algorithm: banksim_core::engine::RNG_ALGORITHM,
            config_hash: &hash,
            config,
            summary,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// The parameter value as given.
    pub value: String,
    pub runs: usize,
    pub mean_alpha: f64,
    pub mean_return_volatility: f64,
    pub mean_final_loss: f64,
    pub mean_n_defaults: f64,
    pub systemic_default_probability: f64,
}

impl SweepRow {
    fn from_summary(value: &str, s: &EnsembleSummary) -> Self {
        Self {
            value: value.to_string(),
            runs: s.runs,
            mean_alpha: s.alpha.mean,
            mean_return_volatility: s.return_volatility.mean,
            mean_final_loss: s.final_loss.mean,
            mean_n_defaults: s.n_defaults.mean,
            systemic_default_probability: s.systemic_default_probability,
        }
    }
}

/// One ensemble per value of `parameter`, each over the same seeds.
pub fn sweep(
    base: &SimConfig,
    parameter: &str,
    values: &[String],
    runs: usize,
    base_seed: u64,
) -> Result<Vec<SweepRow>, CliError> {
    if !banksim_core::config::FIELD_NAMES.contains(&parameter) {
        return Err(CliError::Config(format!("unknown parameter {parameter:?}")));
    }
    let configs = values
        .iter()
        .map(|v| {
            let mut c = base.clone();
            c.set_field(parameter, v)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    values
        .iter()
        .zip(&configs)
        .map(|(v, c)| Ok(SweepRow::from_summary(v, &run_ensemble(c, runs, base_seed)?)))
        .collect()
}

pub fn write_sweep(
    dir: &Path,
    base: &SimConfig,
    parameter: &str,
    base_seed: u64,
    rows: &[SweepRow],
) -> Result<(), CliError> {
    create_dir(dir)?;
    let hash = config_hash(base);
    let mut out = open_csv(
        dir,
        SWEEP_FILE,
        base_seed,
        &hash,
        &[
            parameter,
            "runs",
            "mean_alpha",
            "mean_return_volatility",
            "mean_H",
            "mean_n_defaults",
            "systemic_default_probability",
        ],
    )?;
    for r in rows {
        out.row((
            &r.value,
            r.runs,
            r.mean_alpha,
            r.mean_return_volatility,
            r.mean_final_loss,
            r.mean_n_defaults,
            r.systemic_default_probability,
        ))?;
    }
    out.finish()
}
