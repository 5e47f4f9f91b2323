//! Worst-case design over a set of priors.
//!
//! The best achievable hit rate `h(pi) = sum of the k largest + (e^gamma - k)
//! * (k+1)-th largest` depends on the prior only through the pair
//! `f(pi) = (sum of k largest, (k+1)-th largest)` and is increasing and
//! Schur-convex in that pair. The worst-case distortion over a set is
//! `1 - inf h`, attained by the member of the set with the smallest `h`.
//!
//! Three routes are tried in order: the set contains the uniform prior
//! (distortion `1 - e^gamma / n`), the set contains a least-informative
//! member whose `f` pair is weakly sub-majorized by all others, or a direct
//! minimisation of `h` over the set's candidate priors.
//!
//! The reduction sorts each prior independently, so the resulting value is
//! a lower bound on the true minimax distortion. It is exact when the
//! members share one decreasing order of symbols; see
//! [`crate::oracle::minimax_dmin`] for the general case.

use crate::design::{best_hit_rate, optimal_mechanism};
use crate::error::{Error, Result};
use crate::majorization::{prefix_sum_sorted, sort_desc, weak_sub_majorizes};
use crate::types::{LeakageBudget, Mechanism, Prior, PriorSet, Segment};

/// Entries within this distance of `1/n` count as uniform.
const UNIFORM_TOL: f64 = 1e-12;

/// Which argument produced a [`RobustReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobustPath {
    UniformMember,
    LeastInformative,
    GeneralReduction,
}

impl RobustPath {
    pub fn as_str(self) -> &'static str {
        match self {
            RobustPath::UniformMember => "UniformMember",
            RobustPath::LeastInformative => "LeastInformative",
            RobustPath::GeneralReduction => "GeneralReduction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustReport {
    pub d_min: f64,
    pub worst_prior: Prior,
    pub mechanism: Mechanism,
    pub path_used: RobustPath,
}

/// `(sum of the k largest entries, (k+1)-th largest entry)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FGammaPoint {
    pub top_sum: f64,
    pub next: f64,
}

impl FGammaPoint {
    pub fn as_array(&self) -> [f64; 2] {
        [self.top_sum, self.next]
    }
}

pub fn f_gamma(prior: &Prior, k: usize) -> Result<FGammaPoint> {
    let n = prior.len();
    if k == 0 || k >= n {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: n - 1,
        });
    }
    let top_sum = prefix_sum_sorted(prior.probs(), k)?;
    let next = sort_desc(prior.probs())?.sorted_desc[k];
    Ok(FGammaPoint { top_sum, next })
}

/// Best achievable `sum_j p_jj pi_j` under the budget; one minus the
/// fixed-prior minimum distortion.
pub fn h_gamma(prior: &Prior, budget: &LeakageBudget) -> Result<f64> {
    best_hit_rate(budget, prior)
}

/// The member whose `f` pair is weakly sub-majorized by every other
/// member's, if one exists. Among equivalent candidates the first wins.
pub fn find_least_informative(priors: &[Prior], budget: &LeakageBudget) -> Result<Option<Prior>> {
    if priors.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(bad) = priors.iter().find(|p| p.len() != budget.n()) {
        return Err(Error::DimensionMismatch {
            expected: budget.n(),
            got: bad.len(),
        });
    }
    let k = budget.k();
    let points = priors
        .iter()
        .map(|p| f_gamma(p, k).map(|f| f.as_array()))
        .collect::<Result<Vec<_>>>()?;
    'candidate: for (i, fi) in points.iter().enumerate() {
        for (j, fj) in points.iter().enumerate() {
            if i != j && !weak_sub_majorizes(fj, fi)?.holds() {
                continue 'candidate;
            }
        }
        return Ok(Some(priors[i].clone()));
    }
    Ok(None)
}

/// Parameters at which the sorted order along the segment can change,
/// with both endpoints.
pub fn segment_breakpoints(segment: &Segment) -> Vec<f64> {
    segment.breakpoints()
}

/// Upper bound `1 - e^gamma / n` that holds for every nonempty prior set.
pub fn uniform_budget_upper_bound(budget: &LeakageBudget) -> f64 {
    (1.0 - budget.exp_gamma() / budget.n() as f64).max(0.0)
}

fn report(
    budget: &LeakageBudget,
    d_min: f64,
    worst_prior: Prior,
    path_used: RobustPath,
) -> Result<RobustReport> {
    let mechanism = optimal_mechanism(budget, &worst_prior)?;
    Ok(RobustReport {
        d_min,
        worst_prior,
        mechanism,
        path_used,
    })
}

pub fn d_min_robust(budget: &LeakageBudget, set: &PriorSet) -> Result<RobustReport> {
    if set.n() != budget.n() {
        return Err(Error::DimensionMismatch {
            expected: budget.n(),
            got: set.n(),
        });
    }
    let candidates = set.candidate_priors();
    if candidates.is_empty() {
        return Err(Error::EmptySet);
    }

    if let Some(u) = candidates.iter().find(|p| p.is_uniform(UNIFORM_TOL)) {
        return report(
            budget,
            uniform_budget_upper_bound(budget),
            u.clone(),
            RobustPath::UniformMember,
        );
    }

    if let Some(star) = find_least_informative(&candidates, budget)? {
        let d = (1.0 - h_gamma(&star, budget)?).clamp(0.0, 1.0);
        return report(budget, d, star, RobustPath::LeastInformative);
    }

    // strict comparison keeps the earliest minimiser, i.e. the smallest
    // delta within a segment
    let mut best: Option<(f64, &Prior)> = None;
    for p in &candidates {
        let h = h_gamma(p, budget)?;
        if best.is_none_or(|(bh, _)| h < bh) {
            best = Some((h, p));
        }
    }
    let (h, worst) = best.expect("nonempty");
    report(
        budget,
        (1.0 - h).clamp(0.0, 1.0),
        worst.clone(),
        RobustPath::GeneralReduction,
    )
}
