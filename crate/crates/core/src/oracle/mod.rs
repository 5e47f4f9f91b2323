//! Independent checks of the closed-form results.
//!
//! The fixed-prior problem is written out as a linear program over the
//! mechanism entries, with one auxiliary variable per column bounding that
//! column's maximum, and solved by the in-crate simplex. Nothing here calls
//! into the closed-form design code; the oracle only shares the validated
//! input types.

mod simplex;

pub use simplex::{simplex_solve, LinearProgram, LpSolution, LpStatus, FEASIBILITY_TOL, PIVOT_TOL};

use crate::error::{Error, Result};
use crate::robust::h_gamma;
use crate::types::{LeakageBudget, Mechanism, Prior, PriorSet, Segment};

/// Agreement required between the oracle and the closed form.
pub const COMPARISON_TOL: f64 = 1e-7;

fn var_p(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

fn var_m(n: usize, j: usize) -> usize {
    n * n + j
}

/// `(a_ub, b_ub, a_eq, b_eq)`.
type Constraints = (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>, Vec<f64>);

/// Rows shared by every program here: column-max bounds, the budget on
/// their sum and row-stochasticity. `extra` trailing variables are left
/// unconstrained by these rows.
fn mechanism_constraints(budget: &LeakageBudget, extra: usize) -> Constraints {
    let n = budget.n();
    let n_vars = n * n + n + extra;
    let mut a_ub = Vec::with_capacity(n * n + 1);
    let mut b_ub = Vec::with_capacity(n * n + 1);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![0.0; n_vars];
            row[var_p(n, i, j)] = 1.0;
            row[var_m(n, j)] = -1.0;
            a_ub.push(row);
            b_ub.push(0.0);
        }
    }
    let mut row = vec![0.0; n_vars];
    for j in 0..n {
        row[var_m(n, j)] = 1.0;
    }
    a_ub.push(row);
    b_ub.push(budget.exp_gamma());

    let mut a_eq = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0; n_vars];
        for j in 0..n {
            row[var_p(n, i, j)] = 1.0;
        }
        a_eq.push(row);
    }
    (a_ub, b_ub, a_eq, vec![1.0; n])
}

/// Program whose optimum is the best achievable `sum_j pi_j p_jj`.
///
/// Variables: `p_ij` (row-major, `n^2`) then `m_j` (`n`). Constraints:
/// `p_ij <= m_j`, `sum_j m_j <= e^gamma`, `sum_j p_ij = 1`.
pub fn build_dmin_lp(budget: &LeakageBudget, prior: &Prior) -> Result<LinearProgram> {
    let n = budget.n();
    if prior.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: prior.len(),
        });
    }
    let (a_ub, b_ub, a_eq, b_eq) = mechanism_constraints(budget, 0);
    let mut objective = vec![0.0; n * n + n];
    for (j, &pj) in prior.probs().iter().enumerate() {
        objective[var_p(n, j, j)] = pj;
    }
    LinearProgram::new(objective, a_ub, b_ub, a_eq, b_eq)
}

/// Minimum distortion for a known prior, computed by the simplex.
pub fn lp_dmin(budget: &LeakageBudget, prior: &Prior) -> Result<f64> {
    let sol = simplex_solve(&build_dmin_lp(budget, prior)?)?;
    match sol.status {
        LpStatus::Optimal => Ok(1.0 - sol.optimum),
        other => Err(Error::NumericalBreakdown(format!(
            "oracle program reported {other:?}"
        ))),
    }
}

/// Reads the mechanism entries out of a solution of [`build_dmin_lp`] or
/// [`build_minimax_lp`].
pub fn recover_mechanism(solution: &LpSolution, n: usize) -> Result<Mechanism> {
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| solution.x[var_p(n, i, j)].clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    Mechanism::new(rows)
}

/// Program for the worst case over a set of priors, solved exactly:
/// maximise `t` subject to `t <= sum_j pi_j p_jj` for every listed prior,
/// plus the mechanism constraints of [`build_dmin_lp`]. The last variable
/// is `t`.
pub fn build_minimax_lp(budget: &LeakageBudget, priors: &[Prior]) -> Result<LinearProgram> {
    let n = budget.n();
    if priors.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(p) = priors.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let (mut a_ub, mut b_ub, a_eq, b_eq) = mechanism_constraints(budget, 1);
    let t = n * n + n;
    for prior in priors {
        let mut row = vec![0.0; t + 1];
        row[t] = 1.0;
        for (j, &pj) in prior.probs().iter().enumerate() {
            row[var_p(n, j, j)] = -pj;
        }
        a_ub.push(row);
        b_ub.push(0.0);
    }
    let mut objective = vec![0.0; t + 1];
    objective[t] = 1.0;
    LinearProgram::new(objective, a_ub, b_ub, a_eq, b_eq)
}

/// Exact minimax distortion `min_P max_{pi in set} E[d]`.
///
/// For a fixed mechanism the distortion is affine in the prior, so the
/// maximum over a segment sits at an endpoint and the set can be replaced
/// by its extreme priors.
pub fn minimax_dmin(budget: &LeakageBudget, set: &PriorSet) -> Result<f64> {
    let sol = simplex_solve(&build_minimax_lp(budget, &set.extreme_priors())?)?;
    match sol.status {
        LpStatus::Optimal => Ok(1.0 - sol.optimum),
        other => Err(Error::NumericalBreakdown(format!(
            "minimax program reported {other:?}"
        ))),
    }
}

/// Worst-case distortion over a segment evaluated on `steps + 1` evenly
/// spaced parameters. Fewer than two steps are raised to two.
pub fn grid_dmin_robust(budget: &LeakageBudget, segment: &Segment, steps: usize) -> Result<f64> {
    let steps = steps.max(2);
    let (lo, hi) = (segment.delta_min(), segment.delta_max());
    let mut min_h = f64::INFINITY;
    for i in 0..=steps {
        let delta = lo + (hi - lo) * (i as f64 / steps as f64);
        let h = h_gamma(&segment.point(delta)?, budget)?;
        min_h = min_h.min(h);
    }
    Ok((1.0 - min_h).clamp(0.0, 1.0))
}
