//! Run output bundle.
//!
//! A run directory holds four files, all written as the run progresses
//! except the summary:
//!
//! * `timeseries.csv`: `step,price,log_return,total_cash,total_units,H,n_defaults`
//! * `panel.csv`: `step,bank_id,car_pct,cear_pct,alive,car_breach_8pct,cear_breach_4_5pct`
//!   in long format, `(steps + 1) × N` rows. Undefined ratios are empty.
//! * `events.csv`: `step,bank_id,trigger,cascade_iterations,cascade_size`
//! * `summary.json`
//!
//! Each CSV file starts with a `#` comment line carrying the seed and the
//! config hash. Floats are written in shortest round-trip form.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use banksim_core::engine::RNG_ALGORITHM;
use banksim_core::metrics::RunningStats;
use banksim_core::{ExposureMatrix, SimConfig, SimState, StepMetrics};
use serde::{Deserialize, Serialize};

use crate::config::config_hash;
use crate::error::CliError;

/// Version of the output layout and of the simulated step pipeline.
pub const FORMAT_VERSION: &str = "1.0";

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const PANEL_FILE: &str = "panel.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub format_version: String,
    pub seed: u64,
    pub rng_algorithm: String,
    pub config_hash: String,
    pub config: SimConfig,
    pub n_banks: usize,
    pub steps: u64,
    pub alpha: f64,
    pub expected_alpha: f64,
    pub final_price: f64,
    pub final_log_price: f64,
    /// `H(T)`.
    pub final_loss: f64,
    pub n_defaults: usize,
    pub return_volatility: f64,
    pub default_times: Vec<Option<u64>>,
    /// Single-run default frequency per bank (0 or 1).
    pub default_probability: Vec<f64>,
    pub systemic_default: bool,
}

/// Comment line heading every CSV file of a run.
pub fn provenance_line(seed: u64, hash: &str) -> String {
    format!("# seed={seed} config_hash={hash} format_version={FORMAT_VERSION}\n")
}

fn csv_file(dir: &Path, name: &str, first_line: &str) -> Result<CsvSink, CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(CliError::io(&path))?;
    let mut buf = BufWriter::with_capacity(1 << 16, file);
    buf.write_all(first_line.as_bytes())
        .map_err(CliError::io(&path))?;
    Ok(CsvSink {
        writer: csv::Writer::from_writer(buf),
        path,
    })
}

pub(crate) struct CsvSink {
    pub(crate) writer: csv::Writer<BufWriter<File>>,
    pub(crate) path: PathBuf,
}

impl CsvSink {
    pub(crate) fn row<S: Serialize>(&mut self, record: S) -> Result<(), CliError> {
        self.writer
            .serialize(record)
            .map_err(CliError::csv(&self.path))
    }

    pub(crate) fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(CliError::io(&self.path))
    }
}

pub(crate) fn open_csv(
    dir: &Path,
    name: &str,
    seed: u64,
    hash: &str,
    header: &[&str],
) -> Result<CsvSink, CliError> {
    let mut sink = csv_file(dir, name, &provenance_line(seed, hash))?;
    sink.writer
        .write_record(header)
        .map_err(CliError::csv(&sink.path))?;
    Ok(sink)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::io(path)(e.into()))?;
    out.write_all(b"\n").map_err(CliError::io(path))?;
    out.flush().map_err(CliError::io(path))
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

struct RunWriter {
    timeseries: CsvSink,
    panel: CsvSink,
    events: CsvSink,
}

impl RunWriter {
    fn create(dir: &Path, seed: u64, hash: &str) -> Result<Self, CliError> {
        Ok(Self {
            timeseries: open_csv(
                dir,
                TIMESERIES_FILE,
                seed,
                hash,
                &["step", "price", "log_return", "total_cash", "total_units", "H", "n_defaults"],
            )?,
            panel: open_csv(
                dir,
                PANEL_FILE,
                seed,
                hash,
                &[
                    "step",
                    "bank_id",
                    "car_pct",
                    "cear_pct",
                    "alive",
                    "car_breach_8pct",
                    "cear_breach_4_5pct",
                ],
            )?,
            events: open_csv(
                dir,
                EVENTS_FILE,
                seed,
                hash,
                &["step", "bank_id", "trigger", "cascade_iterations", "cascade_size"],
            )?,
        })
    }

    fn metrics(&mut self, m: &StepMetrics) -> Result<(), CliError> {
        self.timeseries.row((
            m.step,
            m.price,
            m.log_return,
            m.total_cash,
            m.total_units,
            m.cumulative_loss,
            m.n_defaults,
        ))?;
        for (bank, r) in m.banks.iter().enumerate() {
            self.panel.row((
                m.step,
                bank,
                r.car_pct,
                r.cear_pct,
                r.alive,
                r.car_breach(),
                r.cear_breach(),
            ))?;
        }
        Ok(())
    }

    fn finish(self) -> Result<(), CliError> {
        self.timeseries.finish()?;
        self.panel.finish()?;
        self.events.finish()
    }
}

/// Runs `config` (optionally on a supplied network) and streams its output
/// bundle into `dir`.
pub fn write_run(
    config: &SimConfig,
    network: Option<ExposureMatrix>,
    dir: &Path,
) -> Result<RunSummary, CliError> {
    config.validate()?;
    create_dir(dir)?;
    let hash = config_hash(config);
    let mut state = match network {
        Some(w) => SimState::init_with_exposures(config, w)?,
        None => SimState::init(config)?,
    };
    let mut out = RunWriter::create(dir, config.seed, &hash)?;
    out.metrics(&state.snapshot())?;
    let mut returns = RunningStats::default();
    for _ in 0..config.horizon_steps {
        let report = state.step()?;
        returns.push(report.metrics.log_return);
        out.metrics(&report.metrics)?;
        for e in &report.new_defaults {
            out.events.row((
                e.step,
                e.bank,
                e.trigger.as_str(),
                e.cascade_iterations,
                e.cascade_size,
            ))?;
        }
    }
    out.finish()?;

    let default_times = state.default_times();
    let n_defaults = state.n_defaults();
    let summary = RunSummary {
        format_version: FORMAT_VERSION.to_string(),
        seed: config.seed,
        rng_algorithm: RNG_ALGORITHM.to_string(),
        config_hash: hash,
        config: config.clone(),
        n_banks: config.n_banks,
        steps: config.horizon_steps,
        alpha: state.alpha(),
        expected_alpha: config.expected_alpha(),
        final_price: state.market().price(),
        final_log_price: state.market().log_price(),
        final_loss: state.cumulative_loss(),
        n_defaults,
        return_volatility: returns.std_dev(),
        default_probability: default_times
            .iter()
            .map(|t| if t.is_some() { 1.0 } else { 0.0 })
            .collect(),
        default_times,
        systemic_default: n_defaults >= config.systemic_k,
    };
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}
