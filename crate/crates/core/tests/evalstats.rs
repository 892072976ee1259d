use gmote_core::evalstats::{
    auc, confusion, metrics_from_counts, rank_methods, stratified_kfold, wilcoxon_signed_rank,
    Alternative, ConfusionCounts, MinMaxScaler, WilcoxonMethod,
};
use gmote_core::{Matrix, RngStream};
use proptest::prelude::*;
use rand::Rng;

/// Recounts metrics straight from label vectors.
fn brute_force(y_true: &[bool], y_pred: &[bool]) -> (f64, f64, Option<f64>, Option<f64>, f64) {
    let n = y_true.len() as f64;
    let correct = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count() as f64;
    let pos = y_true.iter().filter(|&&t| t).count() as f64;
    let neg = n - pos;
    let hits = y_true.iter().zip(y_pred).filter(|(&t, &p)| t && p).count() as f64;
    let predicted = y_pred.iter().filter(|&&p| p).count() as f64;
    let true_neg = y_true
        .iter()
        .zip(y_pred)
        .filter(|(&t, &p)| !t && !p)
        .count() as f64;
    let recall = if pos > 0.0 { hits / pos } else { 0.0 };
    let spec = if neg > 0.0 { true_neg / neg } else { 0.0 };
    let precision = (predicted > 0.0).then(|| hits / predicted);
    let f1 = precision.map(|p| {
        if p + recall > 0.0 {
            2.0 * p * recall / (p + recall)
        } else {
            0.0
        }
    });
    (correct / n, recall, precision, f1, (recall * spec).sqrt())
}

/// P(score⁺ > score⁻) + ½P(=) by enumerating all pairs.
fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

#[test]
fn metrics_match_recount_on_random_matrices() {
    let mut rng = RngStream::new(1, "cm");
    for _ in 0..1000 {
        let n = rng.random_range(1..30);
        let y_true: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let y_pred: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let c = confusion(&y_true, &y_pred).unwrap();
        assert_eq!(c.total(), n);
        let m = metrics_from_counts(c).unwrap();
        let (acc, rec, prec, f1, g) = brute_force(&y_true, &y_pred);
        assert_eq!(m.accuracy, acc);
        assert_eq!(m.recall, rec);
        assert_eq!(m.precision, prec);
        assert_eq!(m.f1, f1);
        assert_eq!(m.gmean, g);
    }
}

#[test]
fn auc_matches_pairwise_count_with_ties() {
    let mut rng = RngStream::new(2, "auc");
    for _ in 0..200 {
        let n = rng.random_range(4..60);
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        labels[0] = true;
        labels[1] = false;
        // coarse grid forces ties
        let scores: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..8) as f64 / 4.0)
            .collect();
        let a = auc(&scores, &labels).unwrap();
        assert!((a - pairwise_auc(&scores, &labels)).abs() < 1e-12);
    }
}

#[test]
fn wilcoxon_exact_and_normal_agree_at_25() {
    let mut rng = RngStream::new(3, "w");
    for _ in 0..100 {
        let x: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.5)).collect();
        let y = vec![0.0; 25];
        let exact = wilcoxon_signed_rank(&x, &y, Alternative::Greater).unwrap();
        assert_eq!(exact.method, WilcoxonMethod::Exact);
        // 26 pairs with one zero difference leaves 25 effective: still exact;
        // the normal branch is reached with an extra non-zero pair, so compare
        // against the textbook normal formula directly
        let n = 25.0f64;
        let mean = n * (n + 1.0) / 4.0;
        let sd = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0).sqrt();
        let z = (exact.statistic - mean - 0.5) / sd;
        let normal = 1.0 - gmote_core::numcore::normal_cdf(z);
        assert!(
            (exact.p_one_sided - normal).abs() < 0.01,
            "{} vs {normal}",
            exact.p_one_sided
        );
    }
}

#[test]
fn wilcoxon_switches_branch_above_25() {
    let x: Vec<f64> = (1..=26).map(|v| v as f64).collect();
    let r = wilcoxon_signed_rank(&x, &[0.0; 26], Alternative::Greater).unwrap();
    assert_eq!(r.method, WilcoxonMethod::NormalApprox);
    assert_eq!(r.n_effective, 26);
    assert!(r.p_one_sided < 1e-4);
}

#[test]
fn wilcoxon_exact_brute_force_enumeration() {
    let mut rng = RngStream::new(4, "enum");
    for _ in 0..50 {
        let n = rng.random_range(1..=10);
        let d: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-3..=3) as f64)
            .filter(|v| *v != 0.0)
            .collect();
        if d.is_empty() {
            continue;
        }
        let r = wilcoxon_signed_rank(&d, &vec![0.0; d.len()], Alternative::Greater).unwrap();
        // average ranks of |d|
        let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        let ranks: Vec<f64> = mags
            .iter()
            .map(|m| {
                let below = mags.iter().filter(|o| *o < m).count() as f64;
                let equal = mags.iter().filter(|o| *o == m).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect();
        let k = d.len();
        let mut at_least = 0usize;
        for mask in 0u32..(1 << k) {
            let w: f64 = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ranks[i])
                .sum();
            if w >= r.statistic - 1e-9 {
                at_least += 1;
            }
        }
        let p = at_least as f64 / (1u64 << k) as f64;
        assert!(
            (r.p_one_sided - p).abs() < 1e-12,
            "{} vs {p}",
            r.p_one_sided
        );
    }
}

#[test]
fn folds_balance_classes() {
    let labels: Vec<bool> = (0..97).map(|i| i % 4 == 0).collect();
    let plan = stratified_kfold(&labels, 5, 3).unwrap();
    for class in [true, false] {
        let counts: Vec<usize> = (0..5)
            .map(|f| {
                plan.test_indices(f)
                    .iter()
                    .filter(|&&i| labels[i] == class)
                    .count()
            })
            .collect();
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        assert!(hi - lo <= 1, "{counts:?}");
    }
    assert_ne!(plan, stratified_kfold(&labels, 5, 4).unwrap());
}

#[test]
fn min_max_scaling_contract() {
    let train = Matrix::from_rows(&[[0.0, 2.0], [10.0, 2.0]]).unwrap();
    let s = MinMaxScaler::fit(&train).unwrap();
    let out = s
        .apply(&Matrix::from_rows(&[[5.0, 9.0], [12.0, -1.0]]).unwrap())
        .unwrap();
    assert_eq!(out.as_slice(), &[0.5, 0.5, 1.2, 0.5]);
    assert!(MinMaxScaler::fit(&Matrix::with_cols(2)).is_err());
}

#[test]
fn metric_set_na_rule() {
    let m = metrics_from_counts(ConfusionCounts {
        true_pos: 0,
        false_pos: 0,
        false_neg: 3,
        true_neg: 7,
    })
    .unwrap();
    assert!(m.precision.is_none() && m.f1.is_none());
}

proptest! {
    #[test]
    fn auc_complement_without_ties(raw in prop::collection::vec(0u32..1_000_000, 4..40), seed in 0u64..1000) {
        let mut scores: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
        scores.sort_by(f64::total_cmp);
        scores.dedup();
        prop_assume!(scores.len() >= 2);
        let mut rng = RngStream::new(seed, "lab");
        let mut labels: Vec<bool> = scores.iter().map(|_| rng.random_bool(0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert_eq!(auc(&scores, &labels).unwrap() + auc(&neg, &labels).unwrap(), 1.0);
    }

    #[test]
    fn metrics_ignore_instance_order(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..40)) {
        let (t, p): (Vec<bool>, Vec<bool>) = pairs.iter().copied().unzip();
        let (rt, rp): (Vec<bool>, Vec<bool>) = pairs.iter().rev().copied().unzip();
        prop_assert_eq!(
            metrics_from_counts(confusion(&t, &p).unwrap()).unwrap(),
            metrics_from_counts(confusion(&rt, &rp).unwrap()).unwrap()
        );
    }

    #[test]
    fn wilcoxon_is_scale_free(d in prop::collection::vec(-5.0f64..5.0, 1..15), scale in 0.01f64..100.0) {
        let zeros = vec![0.0; d.len()];
        let scaled: Vec<f64> = d.iter().map(|v| v * scale).collect();
        let a = wilcoxon_signed_rank(&d, &zeros, Alternative::Less).unwrap();
        let b = wilcoxon_signed_rank(&scaled, &zeros, Alternative::Less).unwrap();
        prop_assert_eq!(a.p_one_sided, b.p_one_sided);
        prop_assert!((0.0..=1.0).contains(&a.p_one_sided));
    }

    #[test]
    fn ranks_sum_to_triangle(scores in prop::collection::vec(prop::option::of(0u8..5), 2..10)) {
        let scores: Vec<Option<f64>> = scores.iter().map(|s| s.map(f64::from)).collect();
        let ranks = rank_methods(&scores);
        let n = scores.len() as f64;
        prop_assert!((ranks.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }
}
