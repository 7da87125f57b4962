use banksim_core::{ErdosRenyi, NetworkGenerator, SimConfig, SimState};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn mean_out_degree_matches_target() {
    let g = ErdosRenyi {
        avg_links: 6.0,
        weight_low: 100.0,
        weight_high: 500.0,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let generations = 10_000;
    let mut links = 0usize;
    for _ in 0..generations {
        let w = g.generate(100, &mut rng).unwrap();
        links += (0..100).map(|i| w.out_degree(i)).sum::<usize>();
    }
    let mean = links as f64 / (generations * 100) as f64;
    assert!((5.9..=6.1).contains(&mean), "mean out-degree {mean}");
}

#[test]
fn symmetric_slope_range_gives_even_split() {
    // a ~ U(-1.05, 1.05): half the banks follow trends on average.
    let runs = 2000;
    let mut total = 0.0;
    for seed in 0..runs {
        let c = SimConfig {
            a0: -1.05,
            seed,
            horizon_steps: 0,
            ..SimConfig::default()
        };
        total += SimState::init(&c).unwrap().alpha();
    }
    let mean = total / runs as f64;
    // Standard error of the mean is 0.5 / sqrt(200_000) ≈ 0.0011.
    assert!((mean - 0.5).abs() < 0.005, "mean alpha {mean}");
}
