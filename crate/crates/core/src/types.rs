//! Validated domain values shared by every analysis module: priors,
//! mechanisms, leakage budgets and prior sets, plus their JSON encodings.
//!
//! Every value is immutable once constructed. Constructors validate; there
//! is no way to obtain an unchecked instance from outside this module.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` when accepting a user-supplied prior.
pub const PRIOR_SUM_TOL: f64 = 1e-9;
/// Tolerance on `|row sum - 1|` when accepting a mechanism.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Tolerance on the direction sum of a segment.
pub const DIRECTION_SUM_TOL: f64 = 1e-12;
/// Breakpoints closer than this are merged.
const BREAKPOINT_MERGE_TOL: f64 = 1e-12;
/// Budgets within this relative distance of an integer are snapped to it.
const BUDGET_SNAP_TOL: f64 = 1e-12;

/// Formats a float with 17 significant digits, which is enough for an
/// exact round trip through any correctly rounding parser.
pub(crate) fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&fmt_num(*v));
    }
    out.push(']');
}

fn schema_err(e: serde_json::Error) -> Error {
    Error::Schema(e.to_string())
}

/// A full-support probability vector over `n >= 2` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    probs: Vec<f64>,
}

impl Prior {
    /// Validates `values` as a prior.
    ///
    /// Entries must be strictly positive and sum to one within
    /// [`PRIOR_SUM_TOL`]. The stored vector is divided by its sum unless the
    /// sum is already within a few ulps of one, so re-validating a stored
    /// prior leaves it bit-for-bit unchanged.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort { len: values.len() });
        }
        for (index, &value) in values.iter().enumerate() {
            // written so that NaN is rejected too
            if value.is_nan() || value <= 0.0 {
                return Err(Error::NonPositiveEntry { index, value });
            }
        }
        let sum: f64 = values.iter().sum();
        if sum.is_nan() || (sum - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let ulp_slack = 4.0 * values.len() as f64 * f64::EPSILON;
        let probs = if (sum - 1.0).abs() <= ulp_slack {
            values
        } else {
            values.into_iter().map(|v| v / sum).collect()
        };
        Ok(Prior { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooShort { len: n });
        }
        Ok(Prior {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// True when every entry is within `tol` of `1/n`.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let u = 1.0 / self.len() as f64;
        self.probs.iter().all(|p| (p - u).abs() <= tol)
    }

    /// Relabels symbols: entry `i` of the result is entry `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: perm.len(),
            });
        }
        Prior::new(perm.iter().map(|&i| self.probs[i]).collect())
    }

    pub fn to_json(&self) -> String {
        let mut s = String::new();
        write_array(&mut s, &self.probs);
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let values: Vec<f64> = serde_json::from_str(text).map_err(schema_err)?;
        Prior::new(values)
    }
}

/// A row-stochastic matrix `p[i][j] = Pr[Y = j | X = i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMechanism {
    rows: Vec<Vec<f64>>,
}

impl Mechanism {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::TooShort { len: rows.len() });
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::EmptyVector);
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::NotRectangular {
                    row: r,
                    expected: cols,
                    got: row.len(),
                });
            }
            let sum: f64 = row.iter().sum();
            let entries_ok = row.iter().all(|&v| (0.0..=1.0).contains(&v));
            if !entries_ok || sum.is_nan() || (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::RowNotStochastic { row: r, sum });
            }
            data.extend_from_slice(row);
        }
        Ok(Mechanism {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Mechanism::new(rows)
    }

    /// Every row equal to `row`; such a channel leaks nothing.
    pub fn constant(n: usize, row: &[f64]) -> Result<Self> {
        Mechanism::new(vec![row.to_vec(); n])
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column_max(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j)).fold(0.0, f64::max)
    }

    /// Diagonal entries `p_jj`, `j < min(rows, cols)`.
    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|j| self.get(j, j))
            .collect()
    }

    /// Applies a relabeling of input and output symbols: entry `(i, j)` of
    /// the result is entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if perm.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: perm.len(),
            });
        }
        let rows = perm
            .iter()
            .map(|&pi| perm.iter().map(|&pj| self.get(pi, pj)).collect())
            .collect();
        Mechanism::new(rows)
    }

    pub fn to_json(&self) -> String {
        let mut s = String::from("{\"rows\": [");
        for i in 0..self.rows {
            if i > 0 {
                s.push_str(", ");
            }
            write_array(&mut s, self.row(i));
        }
        s.push_str("]}");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawMechanism = serde_json::from_str(text).map_err(schema_err)?;
        Mechanism::new(raw.rows)
    }
}

/// A maximal-leakage budget `gamma` (nats) for an alphabet of `n` symbols.
///
/// Budgets above `log n` are clamped: at that point every mechanism is
/// admissible. The integer `k` satisfies `k <= e^gamma <= k + 1` and
/// `1 <= k <= n - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageBudget {
    requested_gamma: f64,
    gamma: f64,
    exp_gamma: f64,
    n: usize,
    k: usize,
}

impl LeakageBudget {
    pub fn new(gamma: f64, n: usize) -> Result<Self> {
        if gamma.is_nan() {
            return Err(Error::InvalidBudget("gamma is NaN".into()));
        }
        if gamma < 0.0 {
            return Err(Error::NegativeGamma(gamma));
        }
        if n < 2 {
            return Err(Error::TooShort { len: n });
        }
        let log_n = (n as f64).ln();
        if gamma >= log_n {
            return Ok(Self::full(gamma, n));
        }
        Ok(Self::build(gamma, gamma.exp(), n))
    }

    /// Builds the budget from `e^gamma` directly, which avoids an
    /// `exp(ln x)` round trip for budgets written as `log x`.
    pub fn from_exp(exp_gamma: f64, n: usize) -> Result<Self> {
        if exp_gamma.is_nan() {
            return Err(Error::InvalidBudget("e^gamma is NaN".into()));
        }
        if exp_gamma < 1.0 {
            return Err(Error::NegativeGamma(exp_gamma.ln()));
        }
        if n < 2 {
            return Err(Error::TooShort { len: n });
        }
        if exp_gamma >= n as f64 {
            return Ok(Self::full(exp_gamma.ln(), n));
        }
        Ok(Self::build(exp_gamma.ln(), exp_gamma, n))
    }

    fn full(requested: f64, n: usize) -> Self {
        LeakageBudget {
            requested_gamma: requested,
            gamma: (n as f64).ln(),
            exp_gamma: n as f64,
            n,
            k: n - 1,
        }
    }

    fn build(gamma: f64, exp_gamma: f64, n: usize) -> Self {
        let nearest = exp_gamma.round();
        let exp_gamma = if (exp_gamma - nearest).abs() <= BUDGET_SNAP_TOL * nearest {
            nearest
        } else {
            exp_gamma
        };
        if exp_gamma >= n as f64 {
            return Self::full(gamma, n);
        }
        let k = (exp_gamma.floor() as usize).clamp(1, n - 1);
        LeakageBudget {
            requested_gamma: gamma,
            gamma,
            exp_gamma,
            n,
            k,
        }
    }

    /// The gamma the caller asked for, before clamping.
    pub fn requested_gamma(&self) -> f64 {
        self.requested_gamma
    }

    /// Effective leakage allowance in nats, `min(gamma, log n)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn exp_gamma(&self) -> f64 {
        self.exp_gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Weight on the `(k+1)`-th most likely symbol, `e^gamma - k`, in `[0, 1]`.
    pub fn fraction(&self) -> f64 {
        (self.exp_gamma - self.k as f64).clamp(0.0, 1.0)
    }

    pub fn is_full_disclosure(&self) -> bool {
        self.exp_gamma >= self.n as f64
    }

    /// Same budget applied to a different alphabet size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        LeakageBudget::from_exp(self.exp_gamma, n)
    }
}

/// An affine family `base + delta * direction`, `delta` in
/// `[delta_min, delta_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    base: Vec<f64>,
    direction: Vec<f64>,
    delta_min: f64,
    delta_max: f64,
}

impl Segment {
    pub fn new(
        base: Vec<f64>,
        direction: Vec<f64>,
        delta_min: f64,
        delta_max: f64,
    ) -> Result<Self> {
        if base.len() < 2 {
            return Err(Error::TooShort { len: base.len() });
        }
        if direction.len() != base.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                got: direction.len(),
            });
        }
        if !base.iter().chain(&direction).all(|v| v.is_finite())
            || !delta_min.is_finite()
            || !delta_max.is_finite()
        {
            return Err(Error::InvalidSegment("non-finite value".into()));
        }
        if delta_min > delta_max {
            return Err(Error::InvalidSegment(format!(
                "delta_min {delta_min} > delta_max {delta_max}"
            )));
        }
        let dir_sum: f64 = direction.iter().sum();
        if dir_sum.abs() > DIRECTION_SUM_TOL {
            return Err(Error::InvalidSegment(format!(
                "direction sums to {dir_sum}, expected 0"
            )));
        }
        let seg = Segment {
            base,
            direction,
            delta_min,
            delta_max,
        };
        for delta in seg.breakpoints() {
            seg.point(delta)?;
        }
        Ok(seg)
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn delta_min(&self) -> f64 {
        self.delta_min
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.direction.iter().all(|&d| d == 0.0)
    }

    /// The prior at parameter `delta`.
    pub fn point(&self, delta: f64) -> Result<Prior> {
        Prior::new(
            self.base
                .iter()
                .zip(&self.direction)
                .map(|(b, d)| b + delta * d)
                .collect(),
        )
    }

    /// Sorted parameters at which the decreasing rearrangement may change,
    /// together with both endpoints. Between consecutive breakpoints the
    /// sorted prior is affine in `delta`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut points = vec![self.delta_min];
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                let slope = self.direction[i] - self.direction[j];
                if slope == 0.0 {
                    continue;
                }
                let delta = (self.base[j] - self.base[i]) / slope;
                if delta > self.delta_min + BREAKPOINT_MERGE_TOL
                    && delta < self.delta_max - BREAKPOINT_MERGE_TOL
                {
                    points.push(delta);
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= BREAKPOINT_MERGE_TOL);
        if self.delta_max > *points.last().unwrap() {
            points.push(self.delta_max);
        }
        points
    }
}

/// A set of candidate priors.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSet {
    Finite(Vec<Prior>),
    Segment(Segment),
    Union(Vec<PriorSet>),
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawPriorSet {
    Finite {
        priors: Vec<Vec<f64>>,
    },
    Segment {
        base: Vec<f64>,
        direction: Vec<f64>,
        delta_min: f64,
        delta_max: f64,
    },
    Union {
        members: Vec<RawPriorSet>,
    },
}

impl PriorSet {
    pub fn finite(priors: Vec<Prior>) -> Result<Self> {
        let first = priors.first().ok_or(Error::EmptySet)?.len();
        if let Some(bad) = priors.iter().find(|p| p.len() != first) {
            return Err(Error::DimensionMismatch {
                expected: first,
                got: bad.len(),
            });
        }
        Ok(PriorSet::Finite(priors))
    }

    pub fn union(members: Vec<PriorSet>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptySet)?.n();
        if let Some(bad) = members.iter().find(|m| m.n() != first) {
            return Err(Error::DimensionMismatch {
                expected: first,
                got: bad.n(),
            });
        }
        Ok(PriorSet::Union(members))
    }

    /// Alphabet size shared by every member.
    pub fn n(&self) -> usize {
        match self {
            PriorSet::Finite(ps) => ps[0].len(),
            PriorSet::Segment(s) => s.len(),
            PriorSet::Union(ms) => ms[0].n(),
        }
    }

    /// The finite list of priors on which every worst-case quantity over the
    /// set is attained: finite members as given, and each segment's
    /// breakpoints in increasing `delta`.
    pub fn candidate_priors(&self) -> Vec<Prior> {
        let mut out = Vec::new();
        self.collect_candidates(&mut out);
        out
    }

    fn collect_candidates(&self, out: &mut Vec<Prior>) {
        match self {
            PriorSet::Finite(ps) => out.extend(ps.iter().cloned()),
            PriorSet::Segment(s) if s.is_degenerate() => {
                out.push(s.point(s.delta_min).expect("validated at construction"));
            }
            PriorSet::Segment(s) => out.extend(
                s.breakpoints()
                    .into_iter()
                    .map(|d| s.point(d).expect("validated at construction")),
            ),
            PriorSet::Union(ms) => ms.iter().for_each(|m| m.collect_candidates(out)),
        }
    }

    /// Extreme points of the set: finite members and segment endpoints.
    /// Any function affine in the prior attains its minimum over the set at
    /// one of these.
    pub fn extreme_priors(&self) -> Vec<Prior> {
        match self {
            PriorSet::Finite(ps) => ps.clone(),
            PriorSet::Segment(s) => {
                let mut v = vec![s.point(s.delta_min).expect("validated at construction")];
                if s.delta_max > s.delta_min && !s.is_degenerate() {
                    v.push(s.point(s.delta_max).expect("validated at construction"));
                }
                v
            }
            PriorSet::Union(ms) => ms.iter().flat_map(|m| m.extreme_priors()).collect(),
        }
    }

    /// Applies the same symbol relabeling to every member.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        match self {
            PriorSet::Finite(ps) => {
                PriorSet::finite(ps.iter().map(|p| p.permuted(perm)).collect::<Result<_>>()?)
            }
            PriorSet::Segment(s) => {
                if perm.len() != s.len() {
                    return Err(Error::DimensionMismatch {
                        expected: s.len(),
                        got: perm.len(),
                    });
                }
                Ok(PriorSet::Segment(Segment::new(
                    perm.iter().map(|&i| s.base[i]).collect(),
                    perm.iter().map(|&i| s.direction[i]).collect(),
                    s.delta_min,
                    s.delta_max,
                )?))
            }
            PriorSet::Union(ms) => {
                PriorSet::union(ms.iter().map(|m| m.permuted(perm)).collect::<Result<_>>()?)
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = String::new();
        self.write_json(&mut s);
        s
    }

    fn write_json(&self, out: &mut String) {
        match self {
            PriorSet::Finite(ps) => {
                out.push_str("{\"type\": \"finite\", \"priors\": [");
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_array(out, p.probs());
                }
                out.push_str("]}");
            }
            PriorSet::Segment(seg) => {
                out.push_str("{\"type\": \"segment\", \"base\": ");
                write_array(out, &seg.base);
                out.push_str(", \"direction\": ");
                write_array(out, &seg.direction);
                let _ = write!(
                    out,
                    ", \"delta_min\": {}, \"delta_max\": {}}}",
                    fmt_num(seg.delta_min),
                    fmt_num(seg.delta_max)
                );
            }
            PriorSet::Union(ms) => {
                out.push_str("{\"type\": \"union\", \"members\": [");
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    m.write_json(out);
                }
                out.push_str("]}");
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawPriorSet = serde_json::from_str(text).map_err(schema_err)?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawPriorSet) -> Result<Self> {
        match raw {
            RawPriorSet::Finite { priors } => {
                PriorSet::finite(priors.into_iter().map(Prior::new).collect::<Result<_>>()?)
            }
            RawPriorSet::Segment {
                base,
                direction,
                delta_min,
                delta_max,
            } => Ok(PriorSet::Segment(Segment::new(
                base, direction, delta_min, delta_max,
            )?)),
            RawPriorSet::Union { members } => PriorSet::union(
                members
                    .into_iter()
                    .map(Self::from_raw)
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

/// Outcome of a design run.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub d_min: f64,
    pub mechanism: Mechanism,
    /// Set for robust designs; `None` when the prior was given.
    pub worst_prior: Option<Prior>,
    pub achieved_leakage: f64,
}
