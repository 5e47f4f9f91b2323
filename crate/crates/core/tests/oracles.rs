//! Cross-checks of the closed forms against oracles that share no code with
//! them.

use maxleak::channel::{expected_distortion, in_budget};
use maxleak::design::{d_min_fixed_prior, optimal_mechanism};
use maxleak::oracle::{grid_dmin_robust, lp_dmin, minimax_dmin};
use maxleak::robust::{d_min_robust, RobustPath};
use maxleak::{sampling, LeakageBudget, Prior, PriorSet, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact optimum for n = 2 by vertex enumeration.
///
/// With `a = p_11`, `b = p_22` the column-max sum is
/// `max(a, 1-b) + max(1-a, b)`, so the feasible set is the polygon
/// `0 <= a, b <= 1`, `2 - E <= a + b <= E`. The best hit rate sits on one
/// of its vertices.
fn binary_dmin(pi: [f64; 2], e: f64) -> f64 {
    // lines written as (ca, cb, rhs) for ca*a + cb*b = rhs
    let lines: [(f64, f64, f64); 6] = [
        (1.0, 0.0, 0.0),
        (1.0, 0.0, 1.0),
        (0.0, 1.0, 0.0),
        (0.0, 1.0, 1.0),
        (1.0, 1.0, e),
        (1.0, 1.0, 2.0 - e),
    ];
    let feasible = |a: f64, b: f64| {
        let eps = 1e-12;
        (-eps..=1.0 + eps).contains(&a)
            && (-eps..=1.0 + eps).contains(&b)
            && a + b <= e + eps
            && a + b >= 2.0 - e - eps
    };
    let mut best = f64::NEG_INFINITY;
    for (i, l1) in lines.iter().enumerate() {
        for l2 in &lines[i + 1..] {
            let det = l1.0 * l2.1 - l1.1 * l2.0;
            if det.abs() < 1e-15 {
                continue;
            }
            let a = (l1.2 * l2.1 - l1.1 * l2.2) / det;
            let b = (l1.0 * l2.2 - l1.2 * l2.0) / det;
            if feasible(a, b) {
                best = best.max(pi[0] * a + pi[1] * b);
            }
        }
    }
    1.0 - best
}

#[test]
fn binary_alphabet_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..500 {
        let p0: f64 = rng.gen_range(0.01..0.99);
        let gamma = rng.gen_range(0.0..=2f64.ln());
        let b = LeakageBudget::new(gamma, 2).unwrap();
        let pi = Prior::new(vec![p0, 1.0 - p0]).unwrap();
        let oracle = binary_dmin([p0, 1.0 - p0], b.exp_gamma());
        assert!((d_min_fixed_prior(&b, &pi).unwrap() - oracle).abs() < 1e-12);
        assert!((lp_dmin(&b, &pi).unwrap() - oracle).abs() < 1e-9);
    }
}

#[test]
fn no_random_admissible_mechanism_beats_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let b = sampling::random_budget(&mut rng, n);
        let pi = sampling::random_prior(&mut rng, n);
        let d = d_min_fixed_prior(&b, &pi).unwrap();
        for _ in 0..20 {
            let p = sampling::random_in_budget(&mut rng, &b);
            assert!(in_budget(&p, &b).unwrap());
            assert!(expected_distortion(&p, &pi).unwrap() >= d - 1e-12);
        }
        let p = optimal_mechanism(&b, &pi).unwrap();
        assert!((expected_distortion(&p, &pi).unwrap() - d).abs() < 1e-12);
    }
}

fn example1_segment() -> Segment {
    Segment::new(
        vec![0.4, 0.3, 0.15, 0.15],
        vec![-2.0, 1.0, 0.5, 0.5],
        0.0,
        0.1,
    )
    .unwrap()
}

fn b25() -> LeakageBudget {
    LeakageBudget::from_exp(2.5, 4).unwrap()
}

#[test]
fn segment_grid_agrees_with_breakpoints() {
    let s = example1_segment();
    let exact = d_min_robust(&b25(), &PriorSet::Segment(s.clone()))
        .unwrap()
        .d_min;
    for steps in [10_000, 100_000] {
        let grid = grid_dmin_robust(&b25(), &s, steps).unwrap();
        assert!(grid <= exact + 1e-12);
        assert!(exact - grid < 1e-3);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let n = rng.gen_range(2..=6);
        let b = sampling::random_budget(&mut rng, n);
        let seg = sampling::random_segment(&mut rng, n);
        let exact = d_min_robust(&b, &PriorSet::Segment(seg.clone()))
            .unwrap()
            .d_min;
        let grid = grid_dmin_robust(&b, &seg, 10_000).unwrap();
        // the grid only samples, so it can undershoot the breakpoint minimum
        assert!(grid <= exact + 1e-12, "grid {grid} exact {exact}");
        assert!(exact - grid < 1e-3, "grid {grid} exact {exact}");
    }
}

#[test]
fn reduction_is_a_lower_bound_on_exact_minimax() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..60 {
        let n = rng.gen_range(2..=4);
        let b = sampling::random_budget(&mut rng, n);
        let set = sampling::random_prior_set(&mut rng, n);
        let r = d_min_robust(&b, &set).unwrap();
        let exact = minimax_dmin(&b, &set).unwrap();
        assert!(
            r.d_min <= exact + 1e-7,
            "reduction {} exact {exact}",
            r.d_min
        );
    }
}

#[test]
fn reduction_is_exact_when_members_share_an_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..60 {
        let n = rng.gen_range(2..=4);
        let b = sampling::random_budget(&mut rng, n);
        let priors: Vec<Prior> = (0..3)
            .map(|_| {
                let mut v = sampling::random_prior(&mut rng, n).probs().to_vec();
                v.sort_by(|x, y| y.partial_cmp(x).unwrap());
                Prior::new(v).unwrap()
            })
            .collect();
        let set = PriorSet::finite(priors).unwrap();
        let r = d_min_robust(&b, &set).unwrap();
        let exact = minimax_dmin(&b, &set).unwrap();
        assert!(
            (r.d_min - exact).abs() < 1e-7,
            "reduction {} exact {exact}",
            r.d_min
        );
    }
}

#[test]
fn published_sets_against_exact_minimax() {
    let b = b25();
    let set1 = PriorSet::Segment(example1_segment());
    let r1 = d_min_robust(&b, &set1).unwrap();
    assert!((r1.d_min - 0.3).abs() < 1e-9);
    assert!((minimax_dmin(&b, &set1).unwrap() - 0.3).abs() < 1e-7);

    let set2 = PriorSet::finite(
        [
            [0.3, 0.3, 0.1, 0.3],
            [0.29, 0.28, 0.29, 0.14],
            [0.05, 0.15, 0.4, 0.4],
        ]
        .iter()
        .map(|v| Prior::new(v.to_vec()).unwrap())
        .collect(),
    )
    .unwrap();
    let r2 = d_min_robust(&b, &set2).unwrap();
    assert!((r2.d_min - 0.28).abs() < 1e-9);
    assert_eq!(r2.path_used, RobustPath::LeastInformative);
    // members are ordered differently, so a single mechanism cannot serve
    // every member's sorted optimum at once
    let exact2 = minimax_dmin(&b, &set2).unwrap();
    assert!(exact2 > 0.36 && exact2 < 0.375, "{exact2}");

    let union = PriorSet::union(vec![set1.clone(), set2]).unwrap();
    let ru = d_min_robust(&b, &union).unwrap();
    assert!((ru.d_min - 0.3).abs() < 1e-9);
    assert!(ru.d_min >= r1.d_min - 1e-12);
    assert_eq!(ru.path_used, RobustPath::GeneralReduction);
    assert!((minimax_dmin(&b, &union).unwrap() - 0.375).abs() < 1e-7);
}
