//! Rearrangements, partial sums and the three majorization orders.
//!
//! All comparisons allow an absolute slack of [`ORDER_TOL`] per partial sum,
//! which suits unit-scale probability vectors.

use crate::error::{Error, Result};

pub const ORDER_TOL: f64 = 1e-12;

/// Decreasing rearrangement of a vector along with the permutation that
/// produced it. `index_order[j]` is the (zero-based) position in the
/// original vector of the `j`-th largest entry; ties keep ascending
/// original index.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedView {
    pub sorted_desc: Vec<f64>,
    pub index_order: Vec<usize>,
}

impl SortedView {
    pub fn sorted_asc(&self) -> Vec<f64> {
        self.sorted_desc.iter().rev().copied().collect()
    }
}

/// Outcome of comparing `q` against `p` under one of the orders. The
/// relation is read as "`q` precedes `p`".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderVerdict {
    /// `q` precedes `p` and not the other way around.
    Precedes,
    /// `p` precedes `q` and not the other way around.
    Succeeds,
    /// Both hold: the vectors have the same rearrangement (up to tolerance).
    Equal,
    Incomparable,
}

impl OrderVerdict {
    fn from_pair(q_before_p: bool, p_before_q: bool) -> Self {
        match (q_before_p, p_before_q) {
            (true, true) => OrderVerdict::Equal,
            (true, false) => OrderVerdict::Precedes,
            (false, true) => OrderVerdict::Succeeds,
            (false, false) => OrderVerdict::Incomparable,
        }
    }

    /// `q` precedes `p`, possibly with equality.
    pub fn holds(self) -> bool {
        matches!(self, OrderVerdict::Precedes | OrderVerdict::Equal)
    }

    /// `p` precedes `q`, possibly with equality.
    pub fn holds_reversed(self) -> bool {
        matches!(self, OrderVerdict::Succeeds | OrderVerdict::Equal)
    }
}

pub fn sort_desc(x: &[f64]) -> Result<SortedView> {
    if x.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut index_order: Vec<usize> = (0..x.len()).collect();
    // stable sort keeps ascending index among ties
    index_order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let sorted_desc = index_order.iter().map(|&i| x[i]).collect();
    Ok(SortedView {
        sorted_desc,
        index_order,
    })
}

/// Sum of the `l` largest entries of `x`, `1 <= l <= n`.
pub fn prefix_sum_sorted(x: &[f64], l: usize) -> Result<f64> {
    if l == 0 || l > x.len() {
        return Err(Error::IndexOutOfRange {
            index: l,
            len: x.len(),
        });
    }
    let view = sort_desc(x)?;
    Ok(view.sorted_desc[..l].iter().sum())
}

fn partial_sums(values: impl Iterator<Item = f64>) -> Vec<f64> {
    values
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

fn decreasing_sums(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    partial_sums(v.into_iter())
}

fn increasing_sums(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    partial_sums(v.into_iter())
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if p.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(())
}

fn dominated(lower: &[f64], upper: &[f64]) -> bool {
    lower.iter().zip(upper).all(|(l, u)| *l <= *u + ORDER_TOL)
}

/// Majorization, `q ≺ p`: decreasing partial sums of `q` bounded by those of
/// `p`, with equal totals.
pub fn majorizes(p: &[f64], q: &[f64]) -> Result<OrderVerdict> {
    check_lengths(p, q)?;
    let n = p.len();
    let sp = decreasing_sums(p);
    let sq = decreasing_sums(q);
    if (sp[n - 1] - sq[n - 1]).abs() > ORDER_TOL {
        return Ok(OrderVerdict::Incomparable);
    }
    Ok(OrderVerdict::from_pair(
        dominated(&sq[..n - 1], &sp[..n - 1]),
        dominated(&sp[..n - 1], &sq[..n - 1]),
    ))
}

/// Weak sub-majorization, `q ≺_w p`: every decreasing partial sum of `q`
/// is at most the matching one of `p`.
pub fn weak_sub_majorizes(p: &[f64], q: &[f64]) -> Result<OrderVerdict> {
    check_lengths(p, q)?;
    let sp = decreasing_sums(p);
    let sq = decreasing_sums(q);
    Ok(OrderVerdict::from_pair(
        dominated(&sq, &sp),
        dominated(&sp, &sq),
    ))
}

/// Weak super-majorization, `q ≺^w p`: every increasing partial sum of `q`
/// is at least the matching one of `p`.
pub fn weak_super_majorizes(p: &[f64], q: &[f64]) -> Result<OrderVerdict> {
    check_lengths(p, q)?;
    let sp = increasing_sums(p);
    let sq = increasing_sums(q);
    Ok(OrderVerdict::from_pair(
        dominated(&sp, &sq),
        dominated(&sq, &sp),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use OrderVerdict::*;

    #[test]
    fn sort_examples() {
        let v = sort_desc(&[0.2, 0.4, 0.2, 0.2]).unwrap();
        assert_eq!(v.sorted_desc, vec![0.4, 0.2, 0.2, 0.2]);
        assert_eq!(v.index_order, vec![1, 0, 2, 3]);
        let v = sort_desc(&[5.0, 2.0, 2.0]).unwrap();
        assert_eq!(v.sorted_desc, vec![5.0, 2.0, 2.0]);
        assert_eq!(v.index_order, vec![0, 1, 2]);
        let v = sort_desc(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(v.index_order, vec![0, 1, 2]);
        assert_eq!(v.sorted_asc(), vec![1.0, 1.0, 1.0]);
        assert_eq!(sort_desc(&[]), Err(Error::EmptyVector));
    }

    #[test]
    fn prefix_sum_examples() {
        assert!((prefix_sum_sorted(&[0.4, 0.3, 0.2, 0.1], 2).unwrap() - 0.7).abs() < 1e-15);
        assert!((prefix_sum_sorted(&[0.29, 0.28, 0.29, 0.14], 2).unwrap() - 0.58).abs() < 1e-15);
        assert_eq!(prefix_sum_sorted(&[0.1, 0.7, 0.2], 1).unwrap(), 0.7);
        assert!(matches!(
            prefix_sum_sorted(&[0.5, 0.5], 0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            prefix_sum_sorted(&[0.5, 0.5], 3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn majorization_examples() {
        assert_eq!(
            majorizes(&[5.0, 2.0, 2.0], &[3.0, 3.0, 3.0]).unwrap(),
            Precedes
        );
        assert_eq!(
            majorizes(&[5.0, 2.0, 2.0], &[4.0, 4.0, 1.0]).unwrap(),
            Incomparable
        );
        assert_eq!(majorizes(&[0.4, 0.6], &[0.4, 0.6]).unwrap(), Equal);
        assert_eq!(majorizes(&[0.4, 0.6], &[0.4, 0.5]).unwrap(), Incomparable);
        assert!(matches!(
            majorizes(&[1.0], &[1.0, 0.0]),
            Err(Error::LengthMismatch { .. })
        ));
        // extreme points of {q >= 0 : sum q = 9} majorize (3,3,3)
        for e in [[9.0, 0.0, 0.0], [0.0, 9.0, 0.0], [0.0, 0.0, 9.0]] {
            assert_eq!(majorizes(&e, &[3.0, 3.0, 3.0]).unwrap(), Precedes);
            assert_eq!(majorizes(&e, &[5.0, 2.0, 2.0]).unwrap(), Precedes);
        }
    }

    #[test]
    fn weak_sub_examples() {
        assert_eq!(
            weak_sub_majorizes(&[0.9, 0.3], &[0.8, 0.3]).unwrap(),
            Precedes
        );
        assert_eq!(
            weak_sub_majorizes(&[0.6, 0.2], &[0.58, 0.28]).unwrap(),
            Incomparable
        );
        assert_eq!(weak_sub_majorizes(&[0.6, 0.2], &[0.6, 0.2]).unwrap(), Equal);
    }

    #[test]
    fn weak_super_examples() {
        assert_eq!(
            weak_super_majorizes(&[1.0, 0.0, 0.5], &[1.0, 0.5, 0.5]).unwrap(),
            Precedes
        );
        assert_eq!(
            weak_super_majorizes(&[0.3, 0.7], &[0.3, 0.7]).unwrap(),
            Equal
        );
        assert_eq!(
            weak_super_majorizes(&[0.9, 0.1], &[0.1, 0.9]).unwrap(),
            Equal
        );
    }

    /// Brute-force comparator: checks the defining inequalities over every
    /// subset of size m instead of sorting. The sum of the m largest entries
    /// is the max over all m-subsets.
    fn subset_extreme_sums(x: &[f64], largest: bool) -> Vec<f64> {
        let n = x.len();
        let mut best = vec![
            if largest {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
            n + 1
        ];
        for mask in 1u32..(1 << n) {
            let m = mask.count_ones() as usize;
            let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).sum();
            best[m] = if largest {
                best[m].max(s)
            } else {
                best[m].min(s)
            };
        }
        best[1..].to_vec()
    }

    fn brute_weak_sub(p: &[f64], q: &[f64]) -> bool {
        let sp = subset_extreme_sums(p, true);
        let sq = subset_extreme_sums(q, true);
        sq.iter().zip(&sp).all(|(a, b)| *a <= *b + ORDER_TOL)
    }

    fn brute_weak_super(p: &[f64], q: &[f64]) -> bool {
        let sp = subset_extreme_sums(p, false);
        let sq = subset_extreme_sums(q, false);
        sq.iter().zip(&sp).all(|(a, b)| *a + ORDER_TOL >= *b)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        // coarse grid so ties and exact comparabilities show up often
        (0..n).map(|_| rng.gen_range(0..6) as f64 / 5.0).collect()
    }

    fn random_prob(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(1..8) as f64).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        assert!(brute_weak_sub(&[0.6, 0.2], &[0.6, 0.2]));
        assert!(!brute_weak_sub(&[0.6, 0.2], &[0.58, 0.28]));
        for _ in 0..500 {
            let n = rng.gen_range(2..=6);
            let p = random_vec(&mut rng, n);
            let q = random_vec(&mut rng, n);
            assert_eq!(
                weak_sub_majorizes(&p, &q).unwrap().holds(),
                brute_weak_sub(&p, &q)
            );
            assert_eq!(
                weak_super_majorizes(&p, &q).unwrap().holds(),
                brute_weak_super(&p, &q)
            );
        }
    }

    type Order = fn(&[f64], &[f64]) -> Result<OrderVerdict>;

    fn orders() -> [(&'static str, Order); 3] {
        [
            ("majorization", majorizes),
            ("weak-sub", weak_sub_majorizes),
            ("weak-super", weak_super_majorizes),
        ]
    }

    #[test]
    fn order_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..500 {
            let n = rng.gen_range(2..=6);
            // probability vectors make majorization comparable often enough
            let (a, b, c) = if trial % 2 == 0 {
                (
                    random_prob(&mut rng, n),
                    random_prob(&mut rng, n),
                    random_prob(&mut rng, n),
                )
            } else {
                (
                    random_vec(&mut rng, n),
                    random_vec(&mut rng, n),
                    random_vec(&mut rng, n),
                )
            };
            for (name, order) in orders() {
                assert_eq!(order(&a, &a).unwrap(), Equal, "{name} reflexive");
                let ab = order(&b, &a).unwrap(); // a before b
                let bc = order(&c, &b).unwrap(); // b before c
                if ab.holds() && bc.holds() {
                    assert!(order(&c, &a).unwrap().holds(), "{name} transitive");
                }
                if ab == Equal {
                    let mut sa = a.clone();
                    let mut sb = b.clone();
                    sa.sort_by(f64::total_cmp);
                    sb.sort_by(f64::total_cmp);
                    for (x, y) in sa.iter().zip(&sb) {
                        assert!(
                            (x - y).abs() <= 2.0 * ORDER_TOL * n as f64,
                            "{name} antisymmetric"
                        );
                    }
                }
                // swapping arguments mirrors the verdict
                let ba = order(&a, &b).unwrap();
                assert_eq!(ab.holds(), ba.holds_reversed(), "{name} mirror");
            }
        }
    }

    #[test]
    fn majorization_implies_weak_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut seen = 0;
        for _ in 0..500 {
            let n = rng.gen_range(2..=6);
            let p = random_prob(&mut rng, n);
            let q = random_prob(&mut rng, n);
            if majorizes(&p, &q).unwrap().holds() {
                seen += 1;
                assert!(weak_sub_majorizes(&p, &q).unwrap().holds());
                assert!(weak_super_majorizes(&p, &q).unwrap().holds());
            }
        }
        assert!(seen > 50);
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let p = random_vec(&mut rng, n);
            let q = random_vec(&mut rng, n);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let pp: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
            let qq: Vec<f64> = perm.iter().rev().map(|&i| q[i]).collect();
            for (_, order) in orders() {
                assert_eq!(order(&p, &q).unwrap(), order(&pp, &qq).unwrap());
            }
        }
    }

    #[test]
    fn increasing_schur_convex_functions_preserve_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut sub_hits = 0;
        let mut super_hits = 0;
        for _ in 0..1000 {
            let n = rng.gen_range(2..=6);
            let p = random_vec(&mut rng, n);
            let q = random_vec(&mut rng, n);
            let t = rng.gen_range(0.0..1.0);
            let phi = |x: &[f64]| x.iter().map(|v| (v - t).max(0.0)).sum::<f64>();
            if weak_sub_majorizes(&p, &q).unwrap().holds() {
                sub_hits += 1;
                assert!(phi(&q) <= phi(&p) + 1e-9);
            }
            // -min is decreasing and Schur-convex
            let psi = |x: &[f64]| -x.iter().copied().fold(f64::INFINITY, f64::min);
            if weak_super_majorizes(&p, &q).unwrap().holds() {
                super_hits += 1;
                assert!(psi(&q) <= psi(&p) + 1e-12);
            }
        }
        assert!(sub_hits > 100 && super_hits > 100);
    }
}
