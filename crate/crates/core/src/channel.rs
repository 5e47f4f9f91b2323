//! Maximal leakage and expected Hamming distortion of a mechanism.

use crate::error::{Error, Result};
use crate::types::{LeakageBudget, Mechanism, Prior};

/// Slack allowed when testing a mechanism against a leakage budget.
pub const BUDGET_TOL: f64 = 1e-9;

/// Sum over output symbols of the largest entry in each column, i.e.
/// `exp` of the maximal leakage.
pub fn column_max_sum(p: &Mechanism) -> f64 {
    (0..p.n_cols()).map(|j| p.column_max(j)).sum()
}

/// Maximal leakage `log sum_j max_i p_ij` in nats.
pub fn maximal_leakage(p: &Mechanism) -> f64 {
    column_max_sum(p).ln().max(0.0)
}

/// Upper bound `min(log n, log m)` on the leakage of any `n x m` mechanism.
pub fn leakage_upper_bound(p: &Mechanism) -> f64 {
    (p.n_rows().min(p.n_cols()) as f64).ln()
}

fn check_square(p: &Mechanism, n: usize) -> Result<()> {
    if !p.is_square() {
        return Err(Error::NotSquare {
            rows: p.n_rows(),
            cols: p.n_cols(),
        });
    }
    if p.n_rows() != n {
        return Err(Error::DimensionMismatch {
            expected: p.n_rows(),
            got: n,
        });
    }
    Ok(())
}

/// Expected Hamming distortion `1 - sum_j p_jj pi_j`.
pub fn expected_distortion(p: &Mechanism, prior: &Prior) -> Result<f64> {
    check_square(p, prior.len())?;
    let miss: f64 = p
        .diag()
        .iter()
        .zip(prior.probs())
        .map(|(d, q)| (1.0 - d) * q)
        .sum();
    Ok(miss.clamp(0.0, 1.0))
}

/// Whether `p` belongs to the admissible set of the budget.
pub fn in_budget(p: &Mechanism, budget: &LeakageBudget) -> Result<bool> {
    check_square(p, budget.n())?;
    Ok(maximal_leakage(p) <= budget.gamma() + BUDGET_TOL)
}
