mod support;

use std::fs;
use std::path::Path;

use banksim::config::config_hash;
use banksim::matrix::save_matrix;
use banksim::output::{write_run, RunSummary, PANEL_FILE, SUMMARY_FILE, TIMESERIES_FILE};
use banksim_core::{run, ExposureMatrix, SimConfig};

fn small(seed: u64, steps: u64) -> SimConfig {
    SimConfig {
        n_banks: 12,
        avg_links: 3.0,
        horizon_steps: steps,
        seed,
        ..SimConfig::default()
    }
}

fn data_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn zero_horizon_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_run(&small(1, 0), None, dir.path()).unwrap();
    assert_eq!(s.steps, 0);
    assert_eq!(data_rows(&dir.path().join(TIMESERIES_FILE)).len(), 1);
    assert_eq!(data_rows(&dir.path().join(PANEL_FILE)).len(), 12);
}

#[test]
fn files_agree_with_the_in_memory_record() {
    let c = small(5, 700);
    let dir = tempfile::tempdir().unwrap();
    let summary = write_run(&c, None, dir.path()).unwrap();
    let record = run(&c).unwrap();
    let hash = config_hash(&c);

    for name in ["timeseries.csv", "panel.csv", "events.csv"] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("# seed=5 "), "{name}: {first}");
        assert!(first.contains(&hash), "{name}");
    }

    let ts = data_rows(&dir.path().join(TIMESERIES_FILE));
    assert_eq!(ts.len(), record.steps.len());
    for (row, m) in ts.iter().zip(&record.steps) {
        assert_eq!(row[0].parse::<u64>().unwrap(), m.step);
        // Round-trip precision: parsing gives back the exact value.
        assert_eq!(row[1].parse::<f64>().unwrap(), m.price);
        assert_eq!(row[2].parse::<f64>().unwrap(), m.log_return);
        assert_eq!(row[5].parse::<f64>().unwrap(), m.cumulative_loss);
        assert_eq!(row[6].parse::<usize>().unwrap(), m.n_defaults);
    }

    let panel = data_rows(&dir.path().join(PANEL_FILE));
    assert_eq!(panel.len(), (700 + 1) * 12);
    for row in &panel {
        let (step, bank): (usize, usize) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        let r = record.steps[step].banks[bank];
        assert_eq!(row[2].parse::<f64>().ok(), r.car_pct);
        assert_eq!(row[4].parse::<bool>().unwrap(), r.alive);
        assert_eq!(row[5].parse::<bool>().unwrap(), r.car_breach());
        assert_eq!(row[6].parse::<bool>().unwrap(), r.cear_breach());
    }

    let events = data_rows(&dir.path().join("events.csv"));
    assert_eq!(events.len(), record.events.len());
    for (row, e) in events.iter().zip(&record.events) {
        assert_eq!(row[1].parse::<usize>().unwrap(), e.bank);
        assert_eq!(&row[2], e.trigger.as_str());
    }

    let parsed: RunSummary =
        serde_json::from_str(&fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(parsed, summary);
    assert_eq!(parsed.config, c);
    assert_eq!(parsed.default_times, record.default_times);
    assert_eq!(parsed.final_loss, record.steps.last().unwrap().cumulative_loss);
    assert_eq!(parsed.alpha, record.alpha);
}

#[test]
fn supplied_network_is_used() {
    let c = small(2, 50);
    let dir = tempfile::tempdir().unwrap();
    let mut w = ExposureMatrix::zeros(12);
    w.set(0, 1, 1000.0);
    let path = dir.path().join("w.csv");
    save_matrix(&path, &w).unwrap();
    let loaded = banksim::matrix::load_matrix(&path).unwrap();
    assert_eq!(loaded, w);
    let out = dir.path().join("run");
    write_run(&c, Some(loaded), &out).unwrap();
    assert!(out.join(SUMMARY_FILE).exists());
    assert!(write_run(&c, Some(ExposureMatrix::zeros(3)), &out).is_err());
}

#[test]
fn short_runs_pass_the_ledger_replay() {
    for seed in 0..4 {
        let r = support::checked_run(&SimConfig {
            n_banks: 40,
            horizon_steps: 2000,
            seed,
            ..SimConfig::default()
        });
        assert!(r.ledger_violations.is_empty(), "{:?}", r.ledger_violations);
        assert!(r.sign_violations.is_empty(), "{:?}", r.sign_violations);
        assert!(r.min_price > 0.0);
    }
}
