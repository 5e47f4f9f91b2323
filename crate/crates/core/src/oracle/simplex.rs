//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Solves `maximize c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0`.
//! Intended for the small, well-scaled programs of the verification oracle;
//! it keeps no state between calls.

use crate::error::{Error, Result};

/// Entries below this magnitude are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-11;
/// Maximum allowed constraint violation of a returned optimum.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Reduced costs above this value make a column eligible to enter.
const REDUCED_COST_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

impl LinearProgram {
    pub fn new(
        objective: Vec<f64>,
        a_ub: Vec<Vec<f64>>,
        b_ub: Vec<f64>,
        a_eq: Vec<Vec<f64>>,
        b_eq: Vec<f64>,
    ) -> Result<Self> {
        let n = objective.len();
        if a_ub.len() != b_ub.len() {
            return Err(Error::DimensionMismatch {
                expected: a_ub.len(),
                got: b_ub.len(),
            });
        }
        if a_eq.len() != b_eq.len() {
            return Err(Error::DimensionMismatch {
                expected: a_eq.len(),
                got: b_eq.len(),
            });
        }
        if let Some(row) = a_ub.iter().chain(&a_eq).find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        Ok(LinearProgram {
            objective,
            a_ub,
            b_ub,
            a_eq,
            b_eq,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_ub(&self) -> usize {
        self.a_ub.len()
    }

    pub fn n_eq(&self) -> usize {
        self.a_eq.len()
    }

    /// Largest violation of any constraint (including `x >= 0`) at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let ub = self
            .a_ub
            .iter()
            .zip(&self.b_ub)
            .map(|(r, b)| (dot(r) - b).max(0.0));
        let eq = self
            .a_eq
            .iter()
            .zip(&self.b_eq)
            .map(|(r, b)| (dot(r) - b).abs());
        let lb = x.iter().map(|v| (-v).max(0.0));
        ub.chain(eq).chain(lb).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; meaningful only when `status` is `Optimal`.
    pub optimum: f64,
    pub x: Vec<f64>,
    /// `(row, column)` of every pivot performed, in order.
    pub pivots: Vec<(usize, usize)>,
}

struct Tableau {
    rows: Vec<Vec<f64>>, // last entry of each row is the right-hand side
    basis: Vec<usize>,
    n_cols: usize,
    pivots: Vec<(usize, usize)>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.n_cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots.push((r, c));
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut z = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            z += cost[self.basis[i]] * row[j];
        }
        cost[j] - z
    }

    /// Runs primal simplex iterations maximising `cost` over columns for
    /// which `allowed` is true.
    fn optimise(&mut self, cost: &[f64], allowed: &[bool]) -> Result<Step> {
        loop {
            if self.pivots.len() > MAX_PIVOTS {
                return Err(Error::NumericalBreakdown("pivot limit exceeded".into()));
            }
            // Bland: lowest-index improving column
            let entering = (0..self.n_cols)
                .filter(|&j| allowed[j] && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j) > REDUCED_COST_TOL);
            let Some(c) = entering else {
                return Ok(Step::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            let mut tiny_positive = false;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a <= PIVOT_TOL {
                    tiny_positive |= a > 0.0;
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * lr.abs().max(1.0);
                        if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None if tiny_positive => {
                    return Err(Error::NumericalBreakdown(format!(
                        "column {c} has only pivots below {PIVOT_TOL}"
                    )))
                }
                None => return Ok(Step::Unbounded),
            }
        }
    }
}

/// Solves `lp`. Equal inputs produce equal pivot sequences and outputs.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.n_vars();
    let n_ub = lp.n_ub();
    let m = n_ub + lp.n_eq();

    // orient every row to a nonnegative right-hand side
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut needs_artificial = Vec::with_capacity(m);
    let mut slack_sign = Vec::with_capacity(m);
    for (row, &b) in lp.a_ub.iter().zip(&lp.b_ub) {
        let flip = b < 0.0;
        let s = if flip { -1.0 } else { 1.0 };
        coeffs.push(row.iter().map(|v| s * v).collect());
        rhs.push(s * b);
        slack_sign.push(Some(s));
        needs_artificial.push(flip);
    }
    for (row, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        let s = if b < 0.0 { -1.0 } else { 1.0 };
        coeffs.push(row.iter().map(|v| s * v).collect());
        rhs.push(s * b);
        slack_sign.push(None);
        needs_artificial.push(true);
    }

    let n_art = needs_artificial.iter().filter(|&&a| a).count();
    let n_cols = n + n_ub + n_art;
    let art_start = n + n_ub;
    let mut rows = vec![vec![0.0; n_cols + 1]; m];
    let mut basis = vec![0; m];
    let mut next_art = art_start;
    for i in 0..m {
        rows[i][..n].copy_from_slice(&coeffs[i]);
        if let Some(s) = slack_sign[i] {
            rows[i][n + i] = s;
        }
        if needs_artificial[i] {
            rows[i][next_art] = 1.0;
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = n + i;
        }
        rows[i][n_cols] = rhs[i];
    }
    let mut t = Tableau {
        rows,
        basis,
        n_cols,
        pivots: Vec::new(),
    };

    // phase 1: drive artificials to zero
    if n_art > 0 {
        let cost: Vec<f64> = (0..n_cols)
            .map(|j| if j >= art_start { -1.0 } else { 0.0 })
            .collect();
        let allowed = vec![true; n_cols];
        t.optimise(&cost, &allowed)?;
        let infeasibility: f64 = (0..m)
            .filter(|&i| t.basis[i] >= art_start)
            .map(|i| t.rhs(i))
            .sum();
        if infeasibility > FEASIBILITY_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                optimum: f64::NAN,
                x: vec![0.0; n],
                pivots: t.pivots,
            });
        }
        for i in 0..m {
            if t.basis[i] >= art_start {
                if let Some(c) = (0..art_start).find(|&j| t.rows[i][j].abs() > PIVOT_TOL) {
                    t.pivot(i, c);
                }
                // otherwise the row is redundant and its artificial stays at zero
            }
        }
    }

    // phase 2
    let mut cost = vec![0.0; n_cols];
    cost[..n].copy_from_slice(&lp.objective);
    let allowed: Vec<bool> = (0..n_cols).map(|j| j < art_start).collect();
    let step = t.optimise(&cost, &allowed)?;

    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i);
        }
    }
    if let Step::Unbounded = step {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            optimum: f64::INFINITY,
            x,
            pivots: t.pivots,
        });
    }
    let violation = lp.max_violation(&x);
    if violation > FEASIBILITY_TOL {
        return Err(Error::NumericalBreakdown(format!(
            "optimal point violates constraints by {violation}"
        )));
    }
    let optimum = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        optimum,
        x,
        pivots: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable() {
        let lp = LinearProgram::new(vec![1.0], vec![vec![1.0]], vec![1.0], vec![], vec![]).unwrap();
        let s = simplex_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.optimum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let lp = LinearProgram::new(
            vec![3.0, 5.0],
            vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            vec![4.0, 12.0, 18.0],
            vec![],
            vec![],
        )
        .unwrap();
        let s = simplex_solve(&lp).unwrap();
        assert!((s.optimum - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equalities_and_negative_rhs() {
        // max -x - y, x + y = 2, -x <= -0.5 (x >= 0.5) -> optimum -2
        let lp = LinearProgram::new(
            vec![-1.0, -1.0],
            vec![vec![-1.0, 0.0]],
            vec![-0.5],
            vec![vec![1.0, 1.0]],
            vec![2.0],
        )
        .unwrap();
        let s = simplex_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.optimum + 2.0).abs() < 1e-12);
        assert!(s.x[0] >= 0.5 - 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram::new(
            vec![1.0],
            vec![vec![1.0]],
            vec![1.0],
            vec![vec![1.0]],
            vec![2.0],
        )
        .unwrap();
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Infeasible);
        let lp = LinearProgram::new(
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0]],
            vec![1.0],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let lp = LinearProgram::new(
            vec![1.0, 2.0],
            vec![],
            vec![],
            vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![1.0, 2.0],
        )
        .unwrap();
        let s = simplex_solve(&lp).unwrap();
        assert!((s.optimum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_ragged_input() {
        assert!(
            LinearProgram::new(vec![1.0, 2.0], vec![vec![1.0]], vec![1.0], vec![], vec![]).is_err()
        );
        assert!(LinearProgram::new(vec![1.0], vec![vec![1.0]], vec![], vec![], vec![]).is_err());
    }
}
