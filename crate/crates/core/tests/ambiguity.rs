mod common;

use common::*;
use mjls::ambiguity::{self, AmbiguitySet, TransitionDataset};
use mjls::TransitionMatrix;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn radius_closed_form() {
    // sqrt(2 (2 ln 2 - ln 0.5) / 100) = sqrt(6 ln 2 / 100)
    let expect = (6.0 * 2f64.ln() / 100.0).sqrt();
    assert!((ambiguity::radius(100, 2, 0.5) - expect).abs() < 1e-15);
    assert!((ambiguity::radius(100, 2, 0.5) - 0.20394).abs() < 1e-4);
    assert!(ambiguity::radius(0, 3, 0.1).is_infinite());
}

#[test]
fn vertices_match_facet_oracle() {
    let mut r = rng(31);
    for m in 2..=4 {
        for _ in 0..40 {
            let c = random_simplex_point(m, &mut r);
            let rad = r.random_range(0.0..1.5);
            let lib = ambiguity::enumerate_vertices(&c, rad);
            let oracle = facet_vertices(&c, rad);
            assert!(same_point_sets(&lib, &oracle, 1e-7), "m={m} c={c:?} r={rad}\nlib {lib:?}\noracle {oracle:?}");
        }
    }
}

#[test]
fn counts_round_trip_through_csv() {
    let ds = TransitionDataset::from_counts(DMatrix::from_row_slice(3, 3, &[1, 2, 3, 0, 0, 0, 7, 8, 9])).unwrap();
    assert_eq!(TransitionDataset::from_csv(&ds.to_csv()).unwrap(), ds);
    let sets = ambiguity::build_all(&ds, 0.1).unwrap();
    assert!(sets[1].is_full_simplex());
    assert!(!sets[0].is_full_simplex());
}

#[test]
fn coverage_at_least_nominal() {
    let row = DVector::from_vec(vec![0.3, 0.7]);
    let rate = coverage_rate(&row, 50, 0.1, 500, 5);
    let sigma = (0.9 * 0.1 / 500.0f64).sqrt();
    assert!(rate >= 0.9 - 3.0 * sigma, "coverage {rate}");
}

#[test]
fn radii_shrink_along_an_ergodic_run() {
    let p = TransitionMatrix::from_rows(&[DVector::from_vec(vec![0.8, 0.2]), DVector::from_vec(vec![0.3, 0.7])]).unwrap();
    let chain = mjls::model::sample_chain(&p, 0, 10_000, 3).unwrap();
    let mut ds = TransitionDataset::new(2);
    let mut checkpoints = Vec::new();
    for (t, w) in chain.windows(2).enumerate() {
        ds.update_counts(&[(w[0], w[1])]).unwrap();
        if (t + 1) % 1000 == 0 {
            let beta = ambiguity::beta_schedule(t + 1);
            let sets = ambiguity::build_all(&ds, beta).unwrap();
            checkpoints.push(sets.iter().map(|s| s.radius).fold(0.0, f64::max));
        }
    }
    assert!(checkpoints.windows(2).all(|w| w[1] < w[0]), "{checkpoints:?}");
    assert!(*checkpoints.last().unwrap() < 0.15, "{checkpoints:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn vertices_lie_in_set_and_on_simplex(seed in any::<u64>(), m in 2usize..5, rad in 0.0f64..2.5) {
        let mut r = rng(seed);
        let c = random_simplex_point(m, &mut r);
        let set = AmbiguitySet::new(c.clone(), rad).unwrap();
        prop_assert!(!set.vertices.is_empty());
        for v in &set.vertices {
            prop_assert!((v.sum() - 1.0).abs() < 1e-12);
            prop_assert!(v.iter().all(|&x| x >= -1e-12));
            prop_assert!((v - &c).lp_norm(1) <= rad + 1e-9);
        }
    }

    /// A larger radius gives a superset: every old vertex is a convex
    /// combination of new ones, checked through support functions.
    #[test]
    fn sets_grow_with_radius(seed in any::<u64>(), m in 2usize..5, r1 in 0.0f64..1.0, dr in 0.0f64..1.0) {
        let mut r = rng(seed);
        let c = random_simplex_point(m, &mut r);
        let small = ambiguity::enumerate_vertices(&c, r1);
        let large = ambiguity::enumerate_vertices(&c, r1 + dr);
        for _ in 0..10 {
            let d = gaussian_vector(m, &mut r);
            let hs = small.iter().map(|v| v.dot(&d)).fold(f64::MIN, f64::max);
            let hl = large.iter().map(|v| v.dot(&d)).fold(f64::MIN, f64::max);
            prop_assert!(hs <= hl + 1e-9);
        }
    }

    #[test]
    fn radius_decreases_with_data(n in 1u64..10_000, m in 2usize..6, beta in 0.001f64..0.9) {
        prop_assert!(ambiguity::radius(n + 1, m, beta) < ambiguity::radius(n, m, beta));
        prop_assert!(ambiguity::radius(n, m, beta) < ambiguity::radius(n, m, beta / 2.0));
    }
}
