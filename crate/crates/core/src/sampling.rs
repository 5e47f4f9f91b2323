//! Seeded random instances for the verification suites and tests.

use rand::Rng;

use crate::channel::column_max_sum;
use crate::types::{LeakageBudget, Mechanism, Prior, PriorSet, Segment};

/// Full-support prior with entries bounded away from zero.
pub fn random_prior<R: Rng>(rng: &mut R, n: usize) -> Prior {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..1.0)).collect();
    let s: f64 = raw.iter().sum();
    Prior::new(raw.into_iter().map(|v| v / s).collect()).expect("positive and normalized")
}

/// Budget with gamma uniform in `[0, log n]`.
pub fn random_budget<R: Rng>(rng: &mut R, n: usize) -> LeakageBudget {
    let gamma = rng.gen_range(0.0..=(n as f64).ln());
    LeakageBudget::new(gamma, n).expect("gamma in range")
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    perm
}

fn random_row<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..m)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.0..1.0)
                }
            })
            .collect();
        let s: f64 = raw.iter().sum();
        if s > 1e-3 {
            return raw.into_iter().map(|v| v / s).collect();
        }
    }
}

/// Random `n x m` row-stochastic matrix, with some exact zeros.
pub fn random_stochastic<R: Rng>(rng: &mut R, n: usize, m: usize) -> Mechanism {
    Mechanism::new((0..n).map(|_| random_row(rng, m)).collect()).expect("rows normalized")
}

/// Random square mechanism whose leakage fits in `budget`.
///
/// A random matrix is mixed with a constant (zero-leakage) matrix. The
/// column-max sum of `t P + (1-t) 1 r^T` is `t S + (1 - t)`, so any
/// `t <= (e^gamma - 1) / (S - 1)` lands inside the budget.
pub fn random_in_budget<R: Rng>(rng: &mut R, budget: &LeakageBudget) -> Mechanism {
    let n = budget.n();
    let p = random_stochastic(rng, n, n);
    let s = column_max_sum(&p);
    if s <= budget.exp_gamma() {
        return p;
    }
    let t_max = ((budget.exp_gamma() - 1.0) / (s - 1.0)).clamp(0.0, 1.0);
    let t = t_max * rng.gen_range(0.0..=1.0);
    let r = random_row(rng, n);
    let rows = (0..n)
        .map(|i| {
            let row: Vec<f64> = (0..n).map(|j| t * p.get(i, j) + (1.0 - t) * r[j]).collect();
            let sum: f64 = row.iter().sum();
            row.into_iter().map(|v| v / sum).collect()
        })
        .collect();
    Mechanism::new(rows).expect("convex combination of stochastic rows")
}

/// Random segment through a random prior, trimmed so every point stays a
/// full-support prior.
pub fn random_segment<R: Rng>(rng: &mut R, n: usize) -> Segment {
    let base = random_prior(rng, n);
    let mut direction: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = direction.iter().sum::<f64>() / n as f64;
    direction.iter_mut().for_each(|d| *d -= mean);
    // pin the sum to exactly representable zero up to rounding in the last entry
    let head: f64 = direction[..n - 1].iter().sum();
    direction[n - 1] = -head;

    // largest |delta| keeping every entry >= 10% of its base value
    let mut hi = f64::INFINITY;
    let mut lo = f64::NEG_INFINITY;
    for (b, d) in base.probs().iter().zip(&direction) {
        if *d < 0.0 {
            hi = hi.min(-0.9 * b / d);
        } else if *d > 0.0 {
            lo = lo.max(-0.9 * b / d);
        }
    }
    let a = rng.gen_range(lo..=0.0);
    let b = rng.gen_range(0.0..=hi);
    Segment::new(base.probs().to_vec(), direction, a, b).expect("trimmed to the simplex interior")
}

/// Random finite set of `size` priors.
pub fn random_finite_set<R: Rng>(rng: &mut R, n: usize, size: usize) -> PriorSet {
    PriorSet::finite((0..size).map(|_| random_prior(rng, n)).collect()).expect("uniform n")
}

/// Random set mixing finite members and segments.
pub fn random_prior_set<R: Rng>(rng: &mut R, n: usize) -> PriorSet {
    match rng.gen_range(0..3) {
        0 => {
            let size = rng.gen_range(1..=5);
            random_finite_set(rng, n, size)
        }
        1 => PriorSet::Segment(random_segment(rng, n)),
        _ => {
            let size = rng.gen_range(1..=3);
            PriorSet::union(vec![
                random_finite_set(rng, n, size),
                PriorSet::Segment(random_segment(rng, n)),
            ])
            .expect("uniform n")
        }
    }
}
