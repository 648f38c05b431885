//! Library results checked against brute-force references.

mod oracle;

use mpclust_core::dist::{pairwise_dense, Metric};
use mpclust_core::hclust::{cut_k, ward_linkage};
use mpclust_core::metrics::ari;
use mpclust_core::rng::{substream, Phase};
use mpclust_core::sampling::anova::{anova_p_value, f_survival};
use rand::Rng;

use oracle::{anova_f, f_tail_by_quadrature, groups, naive_ward, pair_count_ari};

#[test]
fn ward_matches_naive_lance_williams() {
    for case in 0..200u64 {
        let mut rng = substream(case, Phase::Baseline, 0);
        let n = rng.random_range(2..=12);
        let m = rng.random_range(1..=6);
        let values: Vec<f64> = (0..n * m).map(|_| rng.random_range(-5.0..5.0)).collect();
        let d = pairwise_dense(&values, n, m, Metric::Manhattan).unwrap();
        let dense: Vec<f64> = (0..n * n).map(|x| d.get(x / n, x % n)).collect();
        let (heights, partitions) = naive_ward(&dense, n);
        let tree = ward_linkage(&d);
        let mut ours = tree.heights();
        ours.sort_by(f64::total_cmp);
        let mut theirs = heights.clone();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-9, "case {case}: heights {ours:?} vs {theirs:?}");
        }
        for k in 1..=n {
            assert_eq!(groups(&cut_k(&tree, k).unwrap()), partitions[n - k], "case {case}, k = {k}");
        }
    }
}

#[test]
fn ari_matches_pair_counting() {
    for case in 0..100u64 {
        let mut rng = substream(case, Phase::Baseline, 1);
        let n = rng.random_range(2..=50);
        let ka = rng.random_range(1..=5);
        let kb = rng.random_range(1..=5);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let ours = ari(&a, &b).unwrap();
        let theirs = pair_count_ari(&a, &b);
        assert!((ours - theirs).abs() < 1e-12, "case {case}: {ours} vs {theirs}");
        assert!((ari(&b, &a).unwrap() - ours).abs() < 1e-12);
    }
}

#[test]
fn ari_of_random_partitions_is_near_zero() {
    let mut total = 0.0;
    for trial in 0..1000u64 {
        let mut rng = substream(trial, Phase::Baseline, 2);
        let a: Vec<usize> = (0..100).map(|_| rng.random_range(0..4)).collect();
        let b: Vec<usize> = (0..100).map(|_| rng.random_range(0..4)).collect();
        total += ari(&a, &b).unwrap();
    }
    assert!((total / 1000.0).abs() < 0.01);
}

#[test]
fn anova_p_values_match_quadrature() {
    for case in 0..100u64 {
        let mut rng = substream(case, Phase::Baseline, 3);
        let k = rng.random_range(2..=4);
        let n = rng.random_range(k + 1..=12);
        // Every cluster gets at least one member.
        let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        labels.rotate_left(rng.random_range(0..n));
        let values: Vec<f64> = labels.iter().map(|&l| l as f64 * 0.7 + rng.random_range(-1.0..1.0)).collect();
        let (f, d1, d2) = anova_f(&values, &labels);
        let expected = f_tail_by_quadrature(f, d1, d2);
        let got = anova_p_value(&values, &labels, k);
        assert!((got - expected).abs() < 1e-6, "case {case}: F({d1}, {d2}) = {f}: {got} vs {expected}");
    }
}

#[test]
fn closed_form_f_tail() {
    // F(1, 2) tail: 1 - sqrt(F / (F + 2)).
    for f in [0.1, 1.0, 8.0, 40.0] {
        let exact = 1.0 - (f / (f + 2.0f64)).sqrt();
        assert!((f_survival(f, 1.0, 2.0) - exact).abs() < 1e-12);
        assert!((f_tail_by_quadrature(f, 1.0, 2.0) - exact).abs() < 1e-8);
    }
}
