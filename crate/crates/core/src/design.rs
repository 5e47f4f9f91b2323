//! Minimum distortion and an optimal mechanism for a known prior.
//!
//! Under a budget `k <= e^gamma <= k + 1`, the best mechanism spends the
//! budget on the most likely symbols: the `k` most likely are disclosed
//! exactly, the next one is disclosed with probability `e^gamma - k`, and
//! the rest are suppressed. The resulting distortion is
//! `1 - (sum of the k largest prior entries + (e^gamma - k) * (k+1)-th largest)`.

use crate::channel::{in_budget, maximal_leakage};
use crate::error::{Error, Result};
use crate::majorization::sort_desc;
use crate::types::{DesignResult, LeakageBudget, Mechanism, Prior};

/// Tolerance used when matching a diagonal against the optimal pattern.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Prior entries closer than this are treated as tied.
const TIE_TOL: f64 = 1e-12;

fn check_dims(budget: &LeakageBudget, prior: &Prior) -> Result<()> {
    if budget.n() != prior.len() {
        return Err(Error::DimensionMismatch {
            expected: budget.n(),
            got: prior.len(),
        });
    }
    Ok(())
}

/// Largest achievable `sum_j p_jj pi_j` over mechanisms in the budget.
pub(crate) fn best_hit_rate(budget: &LeakageBudget, prior: &Prior) -> Result<f64> {
    check_dims(budget, prior)?;
    if budget.is_full_disclosure() {
        return Ok(1.0);
    }
    let view = sort_desc(prior.probs())?;
    let k = budget.k();
    let top: f64 = view.sorted_desc[..k].iter().sum();
    Ok(top + budget.fraction() * view.sorted_desc[k])
}

pub fn d_min_fixed_prior(budget: &LeakageBudget, prior: &Prior) -> Result<f64> {
    Ok((1.0 - best_hit_rate(budget, prior)?).clamp(0.0, 1.0))
}

/// Target diagonal in decreasing-prior order: `k` ones, then `e^gamma - k`,
/// then zeros.
fn target_diagonal(budget: &LeakageBudget) -> Vec<f64> {
    let n = budget.n();
    let k = budget.k();
    (0..n)
        .map(|r| match r {
            r if r < k => 1.0,
            r if r == k => budget.fraction(),
            _ => 0.0,
        })
        .collect()
}

/// One optimal mechanism for `prior`.
///
/// Rows of the `k` most likely symbols map to themselves. The row of the
/// `(k+1)`-th most likely keeps `e^gamma - k` on its own column and spreads
/// the rest evenly over the `k` disclosed columns; every remaining row is
/// spread evenly over the disclosed columns. Columns of suppressed symbols
/// stay empty, so each column maximum sits on the diagonal and the leakage
/// is exactly `log e^gamma`.
pub fn optimal_mechanism(budget: &LeakageBudget, prior: &Prior) -> Result<Mechanism> {
    check_dims(budget, prior)?;
    let n = budget.n();
    if budget.is_full_disclosure() {
        return Mechanism::identity(n);
    }
    let k = budget.k();
    let order = sort_desc(prior.probs())?.index_order;
    let disclosed = &order[..k];
    let partial = order[k];
    let frac = budget.fraction();

    let mut rows = vec![vec![0.0; n]; n];
    for &j in disclosed {
        rows[j][j] = 1.0;
    }
    rows[partial][partial] = frac;
    let residual = (1.0 - frac) / k as f64;
    for &j in disclosed {
        rows[partial][j] = residual;
    }
    let spread = 1.0 / k as f64;
    for &i in &order[k + 1..] {
        for &j in disclosed {
            rows[i][j] = spread;
        }
    }
    Mechanism::new(rows)
}

/// Minimum distortion, the mechanism attaining it and its leakage.
pub fn design(budget: &LeakageBudget, prior: &Prior) -> Result<DesignResult> {
    let mechanism = optimal_mechanism(budget, prior)?;
    Ok(DesignResult {
        d_min: d_min_fixed_prior(budget, prior)?,
        achieved_leakage: maximal_leakage(&mechanism),
        mechanism,
        worst_prior: None,
    })
}

/// Checks that `p` has the structure of an optimal mechanism for `prior`:
/// within budget, every column maximum on the diagonal, and the optimal
/// diagonal pattern under some ordering of the prior that is consistent
/// with its ties.
pub fn verify_optimality_certificate(
    p: &Mechanism,
    budget: &LeakageBudget,
    prior: &Prior,
) -> Result<bool> {
    check_dims(budget, prior)?;
    if !p.is_square() {
        return Err(Error::NotSquare {
            rows: p.n_rows(),
            cols: p.n_cols(),
        });
    }
    if p.n_rows() != budget.n() {
        return Err(Error::DimensionMismatch {
            expected: budget.n(),
            got: p.n_rows(),
        });
    }
    if !in_budget(p, budget)? {
        return Ok(false);
    }
    let diag = p.diag();
    let n = diag.len();
    if (0..n).any(|j| p.column_max(j) > diag[j] + CERTIFICATE_TOL) {
        return Ok(false);
    }

    // Within each block of tied prior entries any assignment of the target
    // values is admissible, so compare the blocks as multisets.
    let view = sort_desc(prior.probs())?;
    let target = target_diagonal(budget);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (view.sorted_desc[start] - view.sorted_desc[end]).abs() <= TIE_TOL {
            end += 1;
        }
        let mut got: Vec<f64> = view.index_order[start..end]
            .iter()
            .map(|&j| diag[j])
            .collect();
        got.sort_by(|a, b| b.total_cmp(a));
        let matches = got
            .iter()
            .zip(&target[start..end])
            .all(|(g, t)| (g - t).abs() <= CERTIFICATE_TOL);
        if !matches {
            return Ok(false);
        }
        start = end;
    }
    Ok(true)
}
