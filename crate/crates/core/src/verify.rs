//! Seeded randomized suites backing `maxleak verify`.
//!
//! Each suite draws from its own generator, seeded from the user seed and
//! the suite's position, so the report is a pure function of
//! `(seed, trials, n_max)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{expected_distortion, in_budget, maximal_leakage};
use crate::design::{d_min_fixed_prior, optimal_mechanism};
use crate::error::Result;
use crate::majorization::{sort_desc, weak_sub_majorizes};
use crate::oracle::{build_dmin_lp, recover_mechanism, simplex_solve, LpStatus, COMPARISON_TOL};
use crate::ordering::{compare_dmax, d_max, uniform_budget_mechanism};
use crate::robust::{d_min_robust, f_gamma, h_gamma, uniform_budget_upper_bound};
use crate::sampling;
use crate::types::{Prior, PriorSet};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    /// Cases on which the checked implication was actually exercised.
    pub exercised: usize,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub violations: usize,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.max_discrepancy <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub n_max: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn max_discrepancy(&self) -> f64 {
        self.suites
            .iter()
            .map(|s| s.max_discrepancy)
            .fold(0.0, f64::max)
    }
}

struct Tally {
    result: SuiteResult,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally {
            result: SuiteResult {
                name,
                cases: 0,
                exercised: 0,
                max_discrepancy: 0.0,
                tolerance,
                violations: 0,
            },
        }
    }

    fn case(&mut self) {
        self.result.cases += 1;
    }

    fn exercised(&mut self) {
        self.result.exercised += 1;
    }

    fn discrepancy(&mut self, d: f64) {
        if d.is_nan() {
            self.result.violations += 1;
        } else {
            self.result.max_discrepancy = self.result.max_discrepancy.max(d);
        }
    }

    fn check(&mut self, ok: bool) {
        if !ok {
            self.result.violations += 1;
        }
    }
}

fn rng_for(seed: u64, suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(suite))
}

fn oracle_equivalence(seed: u64, trials: usize, n_max: usize) -> Result<SuiteResult> {
    let mut rng = rng_for(seed, 0);
    let mut t = Tally::new("oracle_equivalence", COMPARISON_TOL);
    for _ in 0..trials {
        let n = rng.gen_range(2..=n_max);
        let b = sampling::random_budget(&mut rng, n);
        let pi = sampling::random_prior(&mut rng, n);
        t.case();
        let closed = d_min_fixed_prior(&b, &pi)?;
        let sol = simplex_solve(&build_dmin_lp(&b, &pi)?)?;
        if sol.status != LpStatus::Optimal {
            t.check(false);
            continue;
        }
        t.exercised();
        t.discrepancy((closed - (1.0 - sol.optimum)).abs());
        let feasible = recover_mechanism(&sol, n).and_then(|p| in_budget(&p, &b));
        t.check(matches!(feasible, Ok(true)));
    }
    Ok(t.result)
}

fn optimal_constructions(seed: u64, trials: usize, n_max: usize) -> Result<SuiteResult> {
    let mut rng = rng_for(seed, 1);
    let mut t = Tally::new("optimal_constructions", 1e-9);
    for _ in 0..trials {
        let n = rng.gen_range(2..=n_max);
        let b = sampling::random_budget(&mut rng, n);
        let pi = sampling::random_prior(&mut rng, n);
        let p = optimal_mechanism(&b, &pi)?;
        t.case();
        t.exercised();
        for i in 0..n {
            let s: f64 = p.row(i).iter().sum();
            t.check((s - 1.0).abs() <= 1e-12);
        }
        t.discrepancy((maximal_leakage(&p) - b.gamma()).abs());
        t.check((0..n).all(|j| p.column_max(j) <= p.get(j, j)));
        let d = d_min_fixed_prior(&b, &pi)?;
        t.check((expected_distortion(&p, &pi)? - d).abs() <= 1e-12);
        if !b.is_full_disclosure() {
            let order = sort_desc(pi.probs())?.index_order;
            let zero_cols = order[b.k() + 1..]
                .iter()
                .filter(|&&j| (0..n).all(|i| p.get(i, j) == 0.0))
                .count();
            t.check(zero_cols == n - (b.k() + 1));
        }
    }
    Ok(t.result)
}

fn schur_monotonicity(seed: u64, trials: usize, n_max: usize) -> Result<SuiteResult> {
    let mut rng = rng_for(seed, 2);
    let mut t = Tally::new("schur_monotonicity", 1e-12);
    for _ in 0..trials {
        let n = rng.gen_range(2..=n_max);
        let b = sampling::random_budget(&mut rng, n);
        let pi = sampling::random_prior(&mut rng, n);
        let rho = sampling::random_prior(&mut rng, n);
        t.case();
        let fp = f_gamma(&pi, b.k())?.as_array();
        let fr = f_gamma(&rho, b.k())?.as_array();
        if weak_sub_majorizes(&fr, &fp)?.holds() {
            t.exercised();
            t.discrepancy((h_gamma(&pi, &b)? - h_gamma(&rho, &b)?).max(0.0));
        }
    }
    Ok(t.result)
}

fn dmax_ordering(seed: u64, trials: usize, n_max: usize) -> Result<SuiteResult> {
    let mut rng = rng_for(seed, 3);
    let mut t = Tally::new("dmax_ordering", 1e-12);
    for _ in 0..trials {
        let n = rng.gen_range(2..=n_max);
        let b = sampling::random_budget(&mut rng, n);
        let p = sampling::random_in_budget(&mut rng, &b);
        let q = sampling::random_in_budget(&mut rng, &b);
        t.case();
        let c = compare_dmax(&p, &q)?;
        if c.certificate.holds() {
            t.exercised();
            t.discrepancy((c.d_max_q - c.d_max_p).max(0.0));
        }
        if c.certificate.holds_reversed() {
            t.exercised();
            t.discrepancy((c.d_max_p - c.d_max_q).max(0.0));
        }
    }
    Ok(t.result)
}

fn uniform_budget(seed: u64, trials: usize, n_max: usize) -> Result<SuiteResult> {
    let mut rng = rng_for(seed, 4);
    let mut t = Tally::new("uniform_budget_mechanism", 1e-12);
    for _ in 0..trials {
        let n = rng.gen_range(2..=n_max);
        let b = sampling::random_budget(&mut rng, n);
        let q = uniform_budget_mechanism(n, &b)?;
        let target = 1.0 - b.exp_gamma() / n as f64;
        t.case();
        t.exercised();
        let pi = sampling::random_prior(&mut rng, n);
        t.discrepancy((expected_distortion(&q, &pi)? - target).abs());
        let p = sampling::random_in_budget(&mut rng, &b);
        t.discrepancy((d_max(&q)?.value - d_max(&p)?.value).max(0.0));
    }
    Ok(t.result)
}

fn robust_bounds(seed: u64, trials: usize, n_max: usize) -> Result<SuiteResult> {
    let mut rng = rng_for(seed, 5);
    let mut t = Tally::new("robust_bounds", 1e-9);
    for _ in 0..trials {
        let n = rng.gen_range(2..=n_max);
        let b = sampling::random_budget(&mut rng, n);
        let bound = uniform_budget_upper_bound(&b);
        t.case();
        t.exercised();
        let set = sampling::random_prior_set(&mut rng, n);
        let r = d_min_robust(&b, &set)?;
        t.discrepancy((r.d_min - bound).max(0.0));
        t.discrepancy((expected_distortion(&r.mechanism, &r.worst_prior)? - r.d_min).abs());
        let with_uniform = PriorSet::union(vec![set, PriorSet::finite(vec![Prior::uniform(n)?])?])?;
        t.discrepancy((d_min_robust(&b, &with_uniform)?.d_min - bound).abs());
    }
    Ok(t.result)
}

/// Runs every suite. `trials` cases per suite, alphabet sizes in
/// `2..=n_max`.
pub fn run_suites(seed: u64, trials: usize, n_max: usize) -> Result<VerifyReport> {
    let suites = vec![
        oracle_equivalence(seed, trials, n_max)?,
        optimal_constructions(seed, trials, n_max)?,
        schur_monotonicity(seed, trials, n_max)?,
        dmax_ordering(seed, trials, n_max)?,
        uniform_budget(seed, trials, n_max)?,
        robust_bounds(seed, trials, n_max)?,
    ];
    Ok(VerifyReport {
        seed,
        trials,
        n_max,
        suites,
    })
}
