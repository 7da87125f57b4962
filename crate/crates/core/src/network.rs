//! Interbank lending network.
//!
//! `W[i][j]` is the amount bank `i` has lent to bank `j`. Row sums are the
//! lender's credit `K`, column sums the borrower's debt `L`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, FieldError, Result};

/// Dense `N × N` non-negative lending matrix with an empty diagonal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExposureMatrix {
    n_banks: usize,
    weights: Vec<f64>,
}

impl ExposureMatrix {
    pub fn zeros(n_banks: usize) -> Self {
        Self {
            n_banks,
            weights: vec![0.0; n_banks * n_banks],
        }
    }

    /// Builds a matrix from row-major weights, checking shape, sign and diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: row.len(),
                });
            }
            for (j, &w) in row.iter().enumerate() {
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::Domain("exposures must be finite and non-negative"));
                }
                if i == j && w != 0.0 {
                    return Err(Error::Domain("self-lending is not allowed"));
                }
                m.weights[i * n + j] = w;
            }
        }
        Ok(m)
    }

    pub fn n_banks(&self) -> usize {
        self.n_banks
    }

    pub fn get(&self, lender: usize, borrower: usize) -> f64 {
        self.weights[lender * self.n_banks + borrower]
    }

    /// Sets one exposure. Panics on a negative weight or a diagonal entry.
    pub fn set(&mut self, lender: usize, borrower: usize, amount: f64) {
        assert!(amount >= 0.0, "exposure must be non-negative");
        assert!(lender != borrower || amount == 0.0, "self-lending");
        self.weights[lender * self.n_banks + borrower] = amount;
    }

    pub fn row(&self, lender: usize) -> &[f64] {
        let n = self.n_banks;
        &self.weights[lender * n..(lender + 1) * n]
    }

    /// Credit `K_i = Σ_j W_ij`.
    pub fn credit(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    /// Debt `L_i = Σ_j W_ji`.
    pub fn debt(&self, i: usize) -> f64 {
        (0..self.n_banks).map(|j| self.get(j, i)).sum()
    }

    /// Credit of every bank, in index order.
    pub fn credits(&self) -> Vec<f64> {
        (0..self.n_banks).map(|i| self.credit(i)).collect()
    }

    /// Debt of every bank, in index order.
    pub fn debts(&self) -> Vec<f64> {
        let n = self.n_banks;
        let mut out = vec![0.0; n];
        for i in 0..n {
            for (j, slot) in out.iter_mut().enumerate() {
                *slot += self.weights[i * n + j];
            }
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Number of non-zero outgoing exposures of `lender`.
    pub fn out_degree(&self, lender: usize) -> usize {
        self.row(lender).iter().filter(|&&w| w > 0.0).count()
    }

    /// Extinguishes every exposure touching a defaulted bank: lenders lose
    /// their claims on it (column) and its own claims vanish with it (row).
    pub fn write_off_defaults(&mut self, defaulted: &[usize]) -> Result<()> {
        let n = self.n_banks;
        for &d in defaulted {
            if d >= n {
                return Err(Error::IndexOutOfRange {
                    index: d,
                    n_banks: n,
                });
            }
        }
        for &d in defaulted {
            for k in 0..n {
                self.weights[k * n + d] = 0.0;
                self.weights[d * n + k] = 0.0;
            }
        }
        Ok(())
    }

    /// Zeroes every claim on `borrower`.
    pub(crate) fn zero_column(&mut self, borrower: usize) {
        let n = self.n_banks;
        for k in 0..n {
            self.weights[k * n + borrower] = 0.0;
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks(self.n_banks.max(1)).take(self.n_banks)
    }
}

/// Source of initial lending networks.
pub trait NetworkGenerator {
    fn generate<R: Rng + ?Sized>(&self, n_banks: usize, rng: &mut R) -> Result<ExposureMatrix>;
}

/// Directed Erdős–Rényi network: each ordered pair `(i, j)`, `i != j`, is
/// linked independently with probability `avg_links / (N - 1)` and carries a
/// weight drawn uniformly from `[weight_low, weight_high]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErdosRenyi {
    pub avg_links: f64,
    pub weight_low: f64,
    pub weight_high: f64,
}

impl ErdosRenyi {
    fn check(&self, n_banks: usize) -> Result<()> {
        let mut errors = Vec::new();
        let max_links = n_banks.saturating_sub(1) as f64;
        if n_banks == 0 {
            errors.push(field("n_banks", "at least one bank is required"));
        }
        if !(self.avg_links >= 0.0 && self.avg_links <= max_links) {
            errors.push(field(
                "avg_links",
                alloc::format!("must lie in [0, n_banks - 1] = [0, {max_links}]"),
            ));
        }
        if !(self.weight_low >= 0.0 && self.weight_low <= self.weight_high)
            || !self.weight_high.is_finite()
        {
            errors.push(field(
                "weight",
                "bounds must satisfy 0 <= weight_low <= weight_high < inf",
            ));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }
}

fn field(name: &'static str, message: impl Into<alloc::string::String>) -> FieldError {
    FieldError {
        field: name,
        message: message.into(),
    }
}

impl NetworkGenerator for ErdosRenyi {
    fn generate<R: Rng + ?Sized>(&self, n_banks: usize, rng: &mut R) -> Result<ExposureMatrix> {
        self.check(n_banks)?;
        let mut m = ExposureMatrix::zeros(n_banks);
        if n_banks < 2 || self.avg_links == 0.0 {
            return Ok(m);
        }
        let p = self.avg_links / (n_banks - 1) as f64;
        // Draw order is part of the reproducibility contract: row-major, one
        // link draw per pair and one weight draw per realized link.
        for i in 0..n_banks {
            for j in 0..n_banks {
                if i == j {
                    continue;
                }
                let u: f64 = rng.random();
                if u < p {
                    let w = self.weight_low
                        + (self.weight_high - self.weight_low) * rng.random::<f64>();
                    m.set(i, j, w);
                }
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn three() -> ExposureMatrix {
        let mut w = ExposureMatrix::zeros(3);
        w.set(0, 1, 100.0);
        w.set(0, 2, 200.0);
        w
    }

    #[test]
    fn credit_and_debt() {
        let z = ExposureMatrix::zeros(4);
        assert_eq!(z.credit(2), 0.0);
        assert_eq!(z.debt(2), 0.0);
        let w = three();
        assert_eq!(w.credit(0), 300.0);
        assert_eq!(w.debt(1), 100.0);
        assert_eq!(w.debts(), alloc::vec![0.0, 100.0, 200.0]);
    }

    #[test]
    fn random_sums_match_brute_force() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let gen = ErdosRenyi {
            avg_links: 3.0,
            weight_low: 1.0,
            weight_high: 9.0,
        };
        let w = gen.generate(12, &mut rng).unwrap();
        for i in 0..12 {
            let mut k = 0.0;
            let mut l = 0.0;
            for j in 0..12 {
                k += w.get(i, j);
                l += w.get(j, i);
            }
            assert!((w.credit(i) - k).abs() < 1e-9);
            assert!((w.debt(i) - l).abs() < 1e-9);
        }
        let total_k: f64 = w.credits().iter().sum();
        let total_l: f64 = w.debts().iter().sum();
        assert!((total_k - total_l).abs() < 1e-9);
    }

    #[test]
    fn zero_links_gives_zero_matrix() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let gen = ErdosRenyi {
            avg_links: 0.0,
            weight_low: 100.0,
            weight_high: 500.0,
        };
        assert_eq!(gen.generate(10, &mut rng).unwrap(), ExposureMatrix::zeros(10));
    }

    #[test]
    fn too_many_links_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let gen = ErdosRenyi {
            avg_links: 5.0,
            weight_low: 100.0,
            weight_high: 500.0,
        };
        assert!(matches!(gen.generate(5, &mut rng), Err(Error::Config(_))));
    }

    #[test]
    fn weights_within_bounds_and_no_self_loops() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let gen = ErdosRenyi {
            avg_links: 6.0,
            weight_low: 100.0,
            weight_high: 500.0,
        };
        for _ in 0..20 {
            let w = gen.generate(100, &mut rng).unwrap();
            for i in 0..100 {
                assert_eq!(w.get(i, i), 0.0);
                for &x in w.row(i) {
                    assert!(x == 0.0 || (100.0..=500.0).contains(&x));
                }
            }
        }
    }

    #[test]
    fn write_off_examples() {
        let mut w = three();
        let before = w.clone();
        w.write_off_defaults(&[]).unwrap();
        assert_eq!(w, before);

        let mut w = ExposureMatrix::zeros(2);
        w.set(0, 1, 100.0);
        w.write_off_defaults(&[1]).unwrap();
        assert_eq!(w.credit(0), 0.0);

        let mut once = three();
        once.write_off_defaults(&[1]).unwrap();
        let mut twice = once.clone();
        twice.write_off_defaults(&[1]).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.credit(0), 200.0);

        assert!(three().write_off_defaults(&[3]).is_err());
    }

    #[test]
    fn write_off_zeroes_rows_too() {
        let mut w = three();
        w.write_off_defaults(&[0]).unwrap();
        assert_eq!(w.total_mass(), 0.0);
    }

    #[test]
    fn from_rows_validates() {
        assert!(ExposureMatrix::from_rows(&[alloc::vec![0.0, 1.0], alloc::vec![2.0, 0.0]]).is_ok());
        assert!(ExposureMatrix::from_rows(&[alloc::vec![1.0, 1.0], alloc::vec![2.0, 0.0]]).is_err());
        assert!(ExposureMatrix::from_rows(&[alloc::vec![0.0, -1.0], alloc::vec![2.0, 0.0]]).is_err());
        assert!(ExposureMatrix::from_rows(&[alloc::vec![0.0], alloc::vec![2.0, 0.0]]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn write_off_never_increases(seed in any::<u64>(), n in 3usize..12,
                                         mask in proptest::collection::vec(any::<bool>(), 12)) {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                let gen = ErdosRenyi { avg_links: 1.5, weight_low: 1.0, weight_high: 5.0 };
                let w0 = gen.generate(n, &mut rng).unwrap();
                let defaulted: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
                let mut w = w0.clone();
                w.write_off_defaults(&defaulted).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        prop_assert!(w.get(i, j) <= w0.get(i, j));
                        prop_assert!(w.get(i, j) >= 0.0);
                    }
                    prop_assert!(w.credit(i) <= w0.total_mass());
                    prop_assert!(w.debt(i) <= w0.total_mass());
                }
                let k: f64 = w.credits().iter().sum();
                let l: f64 = w.debts().iter().sum();
                prop_assert!((k - l).abs() <= 1e-9 * (1.0 + k));
            }
        }
    }
}
