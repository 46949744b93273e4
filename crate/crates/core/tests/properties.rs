use proptest::prelude::*;

use summa::density::{upper_density, window_start, CheckpointPlan};
use summa::ideal::membership;
use summa::matrix::RowMatrix;
use summa::multiplier::{multiplier_check, MultiplierCase};
use summa::permutation::{escaper_counts, image_set, Permutation};
use summa::sequence::{exceptional_set, verify_ideal_limit_values};
use summa::{IdealSpec, LazySequence, SetGen, Weight, DEFAULT_ZERO_TOL};

const N: u64 = 4000;

fn finite_set() -> impl Strategy<Value = SetGen> {
    prop::collection::btree_set(1..=N, 0..300)
        .prop_map(|s| SetGen::finite(s.into_iter().collect()).unwrap())
}

fn structured_set() -> impl Strategy<Value = SetGen> {
    prop_oneof![
        finite_set(),
        (1u64..40, 1u64..30).prop_map(|(a, d)| SetGen::progression(a, d).unwrap()),
        (1u64..3000, 0u64..1500).prop_map(|(a, l)| SetGen::range(a, a + l).unwrap()),
        Just(SetGen::Squares),
        Just(SetGen::PowersOfTwo),
    ]
    .prop_flat_map(|s| prop_oneof![Just(s.clone()), Just(s.complement())])
}

fn every(set: &SetGen) -> f64 {
    upper_density(set, &Weight::Linear, N, &CheckpointPlan::Every).unwrap().value
}

fn brute_tail_max(set: &SetGen, max_n: u64) -> f64 {
    let mut c = 0u64;
    let mut best = 0.0f64;
    for n in 1..=max_n {
        c += u64::from(set.contains(n));
        if n >= window_start(max_n) {
            best = best.max(c as f64 / n as f64);
        }
    }
    best
}

/// Values on the grid `k / 8`, so affine maps by dyadic factors stay exact.
fn dyadic_table(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-16i32..=16).prop_map(|k| k as f64 / 8.0), len)
}

fn random_permutation(len: usize) -> impl Strategy<Value = Permutation> {
    Just((1..=len as u64).collect::<Vec<u64>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::explicit(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn density_is_monotone_and_subadditive(a in structured_set(), b in structured_set()) {
        let (da, db) = (every(&a), every(&b));
        let du = every(&a.clone().union(b.clone()));
        prop_assert!(du >= da.max(db));
        prop_assert!(du <= da + db + 1e-12);
    }

    #[test]
    fn complement_counts_fill_the_prefix(a in structured_set()) {
        let c = a.clone().complement();
        for n in [1u64, 17, 999, N] {
            prop_assert_eq!(a.count_upto(n) + c.count_upto(n), n);
        }
    }

    #[test]
    fn tail_estimate_matches_brute_force_on_every_plan(a in structured_set()) {
        let est = upper_density(&a, &Weight::Linear, N, &CheckpointPlan::Every).unwrap();
        prop_assert_eq!(est.value, brute_tail_max(&a, N));
        let geo = upper_density(&a, &Weight::Linear, N, &CheckpointPlan::default()).unwrap();
        for &(n, r) in &geo.checkpoints {
            prop_assert_eq!(r, est.ratio_at(n).unwrap());
        }
    }

    #[test]
    fn exceptional_sets_grow_as_eps_shrinks(values in dyadic_table(2000), eta in -2.0f64..2.0) {
        let grid = [0.9, 0.5, 0.25, 0.1];
        let sets: Vec<Vec<u64>> = grid
            .iter()
            .map(|&e| exceptional_set(&values, eta, e).elements_upto(2000))
            .collect();
        for w in sets.windows(2) {
            prop_assert!(w[0].iter().all(|k| w[1].binary_search(k).is_ok()));
        }
        let r = verify_ideal_limit_values(&values, eta, &IdealSpec::AsymptoticZero, &grid, DEFAULT_ZERO_TOL).unwrap();
        for w in r.per_eps.windows(2) {
            prop_assert!(w[1].estimate.value >= w[0].estimate.value);
        }
    }

    #[test]
    fn limits_commute_with_affine_maps(
        values in dyadic_table(2000),
        eta in (-16i32..=16).prop_map(|k| k as f64 / 8.0),
        a in prop_oneof![Just(2.0), Just(-4.0), Just(0.5), Just(-0.5)],
        b in -3i32..=3,
    ) {
        let b = b as f64;
        let grid = [0.5, 0.25, 0.125];
        let mapped: Vec<f64> = values.iter().map(|v| a * v + b).collect();
        let scaled: Vec<f64> = grid.iter().map(|e| e * a.abs()).collect();
        let z = IdealSpec::AsymptoticZero;
        let r = verify_ideal_limit_values(&values, eta, &z, &grid, DEFAULT_ZERO_TOL).unwrap();
        let s = verify_ideal_limit_values(&mapped, a * eta + b, &z, &scaled, DEFAULT_ZERO_TOL).unwrap();
        prop_assert_eq!(r.verdict, s.verdict);
        for (x, y) in r.per_eps.iter().zip(&s.per_eps) {
            prop_assert_eq!(&x.estimate, &y.estimate);
        }
    }

    #[test]
    fn matrices_act_linearly(
        x in dyadic_table(300),
        y in dyadic_table(300),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let xs = LazySequence::table(x);
        let ys = LazySequence::table(y);
        let combo = xs.clone().affine(a, 0.0).plus(ys.clone().affine(b, 0.0));
        for m in [RowMatrix::Cesaro, RowMatrix::Identity, RowMatrix::Permutation(Permutation::PairSwap)] {
            let lhs = m.apply_all(&combo, 299).unwrap();
            let px = m.apply_all(&xs, 299).unwrap();
            let py = m.apply_all(&ys, 299).unwrap();
            for i in 0..lhs.len() {
                prop_assert!((lhs[i] - (a * px[i] + b * py[i])).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn permutation_matrix_maps_indicators_to_images(p in random_permutation(600), e in finite_set()) {
        let a = RowMatrix::Permutation(p.clone());
        let (image, _) = image_set(&p, &e, 600).unwrap();
        let ax = a.apply_all(&LazySequence::indicator(e.clone()), 600).unwrap();
        for (i, v) in ax.iter().enumerate() {
            prop_assert_eq!(*v == 1.0, image.contains(i as u64 + 1));
        }
    }

    #[test]
    fn escaper_sweep_matches_direct_count(p in random_permutation(400)) {
        let c = escaper_counts(&p, 400).unwrap();
        for n in (1..=400u64).step_by(37) {
            let direct = (1..=n).filter(|&k| p.forward(k).unwrap() > n).count() as u64;
            prop_assert_eq!(c[n as usize - 1], direct);
        }
    }

    #[test]
    fn multiplier_support_law_and_abs_invariance(values in dyadic_table(2000), e in finite_set()) {
        let s = LazySequence::table(values.clone()).with_bound(2.0);
        let restricted: Vec<f64> = (1..=2000u64)
            .map(|n| if e.contains(n) { values[n as usize - 1] } else { 0.0 })
            .collect();
        for eps in [0.5, 0.1] {
            let ex = exceptional_set(&restricted, 0.0, eps);
            prop_assert!(ex.elements_upto(2000).iter().all(|&k| e.contains(k)));
        }
        let case = |seq: LazySequence| MultiplierCase {
            sequence: seq,
            family: vec![e.clone()],
            ideal_j: IdealSpec::AsymptoticZero,
        };
        let grid = [0.5, 0.1, 0.02];
        let plain = multiplier_check(&case(s.clone()), 2000, &grid, DEFAULT_ZERO_TOL).unwrap();
        let abs = multiplier_check(&case(s.abs()), 2000, &grid, DEFAULT_ZERO_TOL).unwrap();
        prop_assert_eq!(plain.verdict, abs.verdict);
    }

    #[test]
    fn finite_sets_belong_to_every_ideal(e in finite_set()) {
        let max_n = 4 * N;
        for ideal in [IdealSpec::Fin, IdealSpec::AsymptoticZero, IdealSpec::UniformZero] {
            let (v, _) = membership(&e, &ideal, max_n, DEFAULT_ZERO_TOL).unwrap();
            prop_assert!(v.is_satisfied(), "{} in {}: {}", e, ideal, v);
        }
    }
}
