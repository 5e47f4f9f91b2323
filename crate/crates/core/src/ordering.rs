//! Worst-case distortion over all full-support priors, and the ordering of
//! mechanisms it induces.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::majorization::{weak_super_majorizes, OrderVerdict};
use crate::types::{LeakageBudget, Mechanism, ROW_SUM_TOL};

/// Supremum of the expected distortion of a mechanism over full-support
/// priors, `1 - min_j p_jj`.
///
/// The supremum is approached by priors concentrating on the weakest
/// diagonal entry and is never attained inside the simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DMax {
    pub value: f64,
    pub attained: bool,
}

pub fn d_max(p: &Mechanism) -> Result<DMax> {
    if !p.is_square() {
        return Err(Error::NotSquare {
            rows: p.n_rows(),
            cols: p.n_cols(),
        });
    }
    let min_diag = p.diag().into_iter().fold(f64::INFINITY, f64::min);
    Ok(DMax {
        value: (1.0 - min_diag).clamp(0.0, 1.0),
        attained: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DMaxComparison {
    pub d_max_p: f64,
    pub d_max_q: f64,
    /// How `D_max(Q)` compares to `D_max(P)`.
    pub direct: Ordering,
    /// Verdict of `q_diag ≺^w p_diag`. When it holds, `D_max(Q) <= D_max(P)`.
    pub certificate: OrderVerdict,
}

impl DMaxComparison {
    /// Whether the majorization certificate, when present, agrees with the
    /// directly computed values.
    pub fn is_consistent(&self) -> bool {
        let q_le_p = self.d_max_q <= self.d_max_p + 1e-12;
        let p_le_q = self.d_max_p <= self.d_max_q + 1e-12;
        (!self.certificate.holds() || q_le_p) && (!self.certificate.holds_reversed() || p_le_q)
    }
}

pub fn compare_dmax(p: &Mechanism, q: &Mechanism) -> Result<DMaxComparison> {
    let dp = d_max(p)?.value;
    let dq = d_max(q)?.value;
    if p.n_rows() != q.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: p.n_rows(),
            got: q.n_rows(),
        });
    }
    let certificate = weak_super_majorizes(&p.diag(), &q.diag())?;
    Ok(DMaxComparison {
        d_max_p: dp,
        d_max_q: dq,
        direct: dq.total_cmp(&dp),
        certificate,
    })
}

/// The mechanism spreading the budget evenly: every diagonal entry is
/// `e^gamma / n` and each row's remaining mass is split evenly over the
/// other columns. Its distortion is `1 - e^gamma / n` under every prior.
pub fn uniform_budget_mechanism(n: usize, budget: &LeakageBudget) -> Result<Mechanism> {
    if n < 2 {
        return Err(Error::TooShort { len: n });
    }
    let e = budget.exp_gamma();
    if e > n as f64 {
        return Err(Error::BudgetExceedsAlphabet { exp_gamma: e, n });
    }
    let diag = e / n as f64;
    let off = (1.0 - diag) / (n - 1) as f64;
    // off <= diag iff e^gamma >= 1, which every budget satisfies
    if off > diag + ROW_SUM_TOL {
        return Err(Error::InfeasibleCompletion(format!(
            "off-diagonal {off} exceeds diagonal {diag}"
        )));
    }
    // rounding can push off one ulp above diag when e^gamma = 1
    let off = off.min(diag);
    let rows = (0..n)
        .map(|i| (0..n).map(|j| if i == j { diag } else { off }).collect())
        .collect();
    Mechanism::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{expected_distortion, in_budget, maximal_leakage};
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ex1() -> Mechanism {
        Mechanism::new(vec![
            vec![0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.3, 0.2, 0.5],
        ])
        .unwrap()
    }

    fn b25() -> LeakageBudget {
        LeakageBudget::from_exp(2.5, 4).unwrap()
    }

    #[test]
    fn d_max_examples() {
        assert_eq!(d_max(&Mechanism::identity(4).unwrap()).unwrap().value, 0.0);
        let d = d_max(&ex1()).unwrap();
        assert_eq!(d.value, 1.0);
        assert!(!d.attained);
        let q = uniform_budget_mechanism(4, &b25()).unwrap();
        assert!((d_max(&q).unwrap().value - 0.375).abs() < 1e-15);
        let rect = Mechanism::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(d_max(&rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn compare_examples() {
        let q = uniform_budget_mechanism(4, &b25()).unwrap();
        let c = compare_dmax(&ex1(), &q).unwrap();
        assert_eq!(c.certificate, OrderVerdict::Precedes);
        assert_eq!(c.direct, Ordering::Less);
        assert!(c.is_consistent());

        let c = compare_dmax(&ex1(), &ex1()).unwrap();
        assert_eq!(c.certificate, OrderVerdict::Equal);
        assert_eq!(c.direct, Ordering::Equal);

        let p = Mechanism::new(vec![vec![0.9, 0.1], vec![0.9, 0.1]]).unwrap();
        let q = Mechanism::new(vec![vec![0.5, 0.5], vec![0.6, 0.4]]).unwrap();
        let c = compare_dmax(&p, &q).unwrap();
        assert_eq!(c.certificate, OrderVerdict::Incomparable);
        assert!((c.d_max_p - 0.9).abs() < 1e-15 && (c.d_max_q - 0.6).abs() < 1e-15);
        assert_eq!(c.direct, Ordering::Less);
    }

    #[test]
    fn uniform_budget_examples() {
        let full = LeakageBudget::new(4f64.ln(), 4).unwrap();
        assert_eq!(
            uniform_budget_mechanism(4, &full).unwrap(),
            Mechanism::identity(4).unwrap()
        );

        let q = uniform_budget_mechanism(4, &b25()).unwrap();
        assert!(q.diag().iter().all(|&d| d == 0.625));
        assert!((maximal_leakage(&q) - 2.5f64.ln()).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let pi = sampling::random_prior(&mut rng, 4);
            assert!((expected_distortion(&q, &pi).unwrap() - 0.375).abs() < 1e-12);
        }

        let q = uniform_budget_mechanism(2, &LeakageBudget::new(0.0, 2).unwrap()).unwrap();
        assert_eq!(q.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(maximal_leakage(&q), 0.0);

        let big = LeakageBudget::from_exp(3.5, 6).unwrap();
        assert!(matches!(
            uniform_budget_mechanism(3, &big),
            Err(Error::BudgetExceedsAlphabet { .. })
        ));
    }

    #[test]
    fn completion_sweep() {
        for n in 2..=8usize {
            for step in 0..=40 {
                let b = LeakageBudget::new((n as f64).ln() * step as f64 / 40.0, n).unwrap();
                let q = uniform_budget_mechanism(n, &b).unwrap();
                for j in 0..n {
                    assert_eq!(q.column_max(j), q.get(j, j));
                }
                assert!((maximal_leakage(&q) - b.gamma()).abs() <= 1e-9);
                assert!(in_budget(&q, &b).unwrap());
            }
        }
    }

    #[test]
    fn certificate_orders_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut hits = 0;
        for _ in 0..500 {
            let n = rng.gen_range(2..=5);
            let b = sampling::random_budget(&mut rng, n);
            let p = sampling::random_in_budget(&mut rng, &b);
            let q = sampling::random_in_budget(&mut rng, &b);
            let c = compare_dmax(&p, &q).unwrap();
            if c.certificate.holds() || c.certificate.holds_reversed() {
                hits += 1;
            }
            assert!(c.is_consistent());
        }
        assert!(hits > 50);
    }

    #[test]
    fn uniform_budget_mechanism_is_most_reliable() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..500 {
            let n = rng.gen_range(2..=6);
            let b = sampling::random_budget(&mut rng, n);
            let q = uniform_budget_mechanism(n, &b).unwrap();
            let p = sampling::random_in_budget(&mut rng, &b);
            assert!(in_budget(&p, &b).unwrap());
            let dp = d_max(&p).unwrap().value;
            assert!(d_max(&q).unwrap().value <= dp + 1e-12);
            assert!(dp >= 1.0 - b.exp_gamma() / n as f64 - 1e-12);
        }
    }
}
