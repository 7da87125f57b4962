//! Default contagion through interbank exposures.
//!
//! Starting from an initial default set, every lender absorbs the full
//! amount it lent to each defaulted borrower. A surviving bank whose
//! accumulated loss strictly exceeds its pre-cascade equity defaults in
//! turn. The process runs to its fixed point.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::ExposureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    /// Default flag per bank at the fixed point, including the initial set.
    pub defaulted: Vec<bool>,
    /// Loss absorbed by each bank from defaulted borrowers.
    pub cumulative_loss: Vec<f64>,
    /// Input matrix with every claim on a defaulted bank removed. Rows of
    /// defaulted banks are left untouched.
    pub updated_exposures: ExposureMatrix,
    /// Number of propagation rounds, the last of which adds no default.
    pub iterations: usize,
}

impl CascadeResult {
    pub fn defaulted_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.defaulted
            .iter()
            .enumerate()
            .filter_map(|(i, &d)| d.then_some(i))
    }

    pub fn n_defaulted(&self) -> usize {
        self.defaulted.iter().filter(|&&d| d).count()
    }
}

/// Propagates `initial_defaults` through `exposures`.
///
/// `equity[i]` is bank `i`'s equity before the cascade. A bank with negative
/// equity fails even without losses and joins the initial set. Banks that
/// must never be flagged (already removed from the system) can be given
/// `f64::INFINITY`.
pub fn run_cascade(
    exposures: &ExposureMatrix,
    equity: &[f64],
    initial_defaults: &[usize],
) -> Result<CascadeResult> {
    let n = exposures.n_banks();
    if equity.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: equity.len(),
        });
    }
    let mut defaulted = vec![false; n];
    for &d in initial_defaults {
        if d >= n {
            return Err(Error::IndexOutOfRange {
                index: d,
                n_banks: n,
            });
        }
        defaulted[d] = true;
    }
    for (flag, &e) in defaulted.iter_mut().zip(equity) {
        if 0.0 > e {
            *flag = true;
        }
    }

    let mut loss = vec![0.0; n];
    let mut working = exposures.clone();
    let mut frontier: Vec<usize> = (0..n).filter(|&j| defaulted[j]).collect();
    let mut iterations = 0;

    while !frontier.is_empty() {
        iterations += 1;
        // Each defaulted borrower's column is charged to its lenders once,
        // then removed.
        for &j in &frontier {
            for (i, q) in loss.iter_mut().enumerate() {
                *q += working.get(i, j);
            }
            working.zero_column(j);
        }
        frontier = (0..n)
            .filter(|&i| !defaulted[i] && loss[i] > equity[i])
            .collect();
        for &i in &frontier {
            defaulted[i] = true;
        }
    }

    Ok(CascadeResult {
        defaulted,
        cumulative_loss: loss,
        updated_exposures: working,
        iterations,
    })
}

/// System-wide losses attributed to a set of defaults.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SystemicLoss {
    /// `H_i = Σ_{j≠i} h_j·v_j`.
    pub per_bank: Vec<f64>,
    /// `H = Σ_i H_i`.
    pub total: f64,
    /// `Σ_j h_j·v_j`, the destroyed economic value counted once.
    pub destroyed_value: f64,
}

/// Evaluates `H_i = Σ_{j≠i} h_j·v_j` and `H = Σ_i H_i` for default flags `h`
/// and economic values `v_j = C_j + J_j + K_j`.
pub fn total_losses(defaulted: &[bool], economic_value: &[f64]) -> Result<SystemicLoss> {
    if defaulted.len() != economic_value.len() {
        return Err(Error::Dimension {
            expected: defaulted.len(),
            actual: economic_value.len(),
        });
    }
    let destroyed: f64 = defaulted
        .iter()
        .zip(economic_value)
        .filter(|(&h, _)| h)
        .map(|(_, &v)| v)
        .sum();
    let per_bank: Vec<f64> = defaulted
        .iter()
        .zip(economic_value)
        .map(|(&h, &v)| if h { destroyed - v } else { destroyed })
        .collect();
    let total = per_bank.iter().sum();
    Ok(SystemicLoss {
        per_bank,
        total,
        destroyed_value: destroyed,
    })
}
