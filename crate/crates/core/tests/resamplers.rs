use gmote_core::resamplers::{
    borderline_labels, borderline_smote, cluster_smote, dbscan, dbsmote, kmeans, knn_index,
    knn_within, largest_remainder, oversample, ros, safe_level_smote, safe_levels, smote,
    third_quartile_knn_distance, BorderlineLabel, EpsRule, Fallback, Oversampled, Provenance,
    ResamplerParams, SelfMatch, NOISE,
};
use gmote_core::{Matrix, RngStream};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn blob(center: &[f64], n: usize, scale: f64, rng: &mut RngStream) -> Matrix {
    let mut out = Matrix::with_cols(center.len());
    for _ in 0..n {
        let row: Vec<f64> = center
            .iter()
            .map(|c| {
                let z: f64 = StandardNormal.sample(rng);
                c + scale * z
            })
            .collect();
        out.push_row(&row).unwrap();
    }
    out
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
fn segment_residual(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        (ap.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ap.iter()
        .zip(&ab)
        .map(|(x, y)| (x - t * y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Checks every output against its logged provenance: segment rows lie on
/// their segment, copies equal their source.
fn assert_provenance_geometry(out: &Oversampled, x_min: &Matrix) {
    assert_eq!(out.provenance.len(), out.rows.n_rows());
    for (row, p) in out.rows.rows().zip(&out.provenance) {
        match *p {
            Provenance::Copy { source } => assert_eq!(row, x_min.row(source)),
            Provenance::Segment { from, to, gap } => {
                assert!((0.0..=1.0).contains(&gap));
                let r = segment_residual(row, x_min.row(from), x_min.row(to));
                assert!(r <= 1e-9, "residual {r}");
            }
            Provenance::Walk { .. } => panic!("interpolation method produced a walk"),
        }
    }
}

fn imbalanced(seed: u64) -> (Matrix, Matrix) {
    let mut rng = RngStream::new(seed, "data");
    let x_min = blob(&[0.0, 0.0, 0.0], 40, 1.0, &mut rng);
    let x_maj = blob(&[1.5, 1.0, 0.0], 150, 1.5, &mut rng);
    (x_min, x_maj)
}

#[test]
fn smote_rows_lie_on_logged_segments() {
    let (x_min, _) = imbalanced(1);
    let out = smote(&x_min, 3, 10_000, &mut RngStream::new(2, "smote")).unwrap();
    assert_eq!(out.len(), 10_000);
    assert_provenance_geometry(&out, &x_min);
    let nn = knn_within(&x_min, 3).unwrap();
    for p in &out.provenance {
        let Provenance::Segment { from, to, .. } = *p else {
            panic!()
        };
        assert!(nn.indices(from).contains(&to));
    }
}

#[test]
fn ros_frequencies_are_uniform() {
    let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
    let out = ros(&x, 10_000, &mut RngStream::new(3, "ros")).unwrap();
    for v in 0..4 {
        let f = out.rows.rows().filter(|r| r[0] == v as f64).count() as f64 / 10_000.0;
        assert!((f - 0.25).abs() < 0.03);
    }
    let single = Matrix::from_rows(&[[7.0, 8.0]]).unwrap();
    let copies = ros(&single, 5, &mut RngStream::new(3, "ros")).unwrap();
    assert!(copies.rows.rows().all(|r| r == [7.0, 8.0]));
}

#[test]
fn every_method_hits_the_count_and_is_deterministic() {
    let (x_min, x_maj) = imbalanced(4);
    for name in [
        "ROS", "SMOTE", "BLSMOTE", "SLSMOTE", "DBSMOTE", "C-SMOTE", "RBO",
    ] {
        let params = ResamplerParams::defaults_for(name).unwrap();
        for n in [0usize, 1, 37, 110] {
            let a = oversample(&params, &x_min, &x_maj, n, &mut RngStream::new(5, name)).unwrap();
            let b = oversample(&params, &x_min, &x_maj, n, &mut RngStream::new(5, name)).unwrap();
            assert_eq!(a.len(), n, "{name}");
            assert_eq!(a, b, "{name}");
            if name != "RBO" {
                assert_provenance_geometry(&a, &x_min);
            }
        }
    }
}

#[test]
fn zero_requests_skip_validation() {
    let empty = Matrix::with_cols(2);
    for name in [
        "ROS", "SMOTE", "BLSMOTE", "SLSMOTE", "DBSMOTE", "C-SMOTE", "RBO",
    ] {
        let params = ResamplerParams::defaults_for(name).unwrap();
        let out = oversample(&params, &empty, &empty, 0, &mut RngStream::new(0, "z")).unwrap();
        assert!(out.is_empty());
    }
}

#[test]
fn too_few_minority_rows_rejected() {
    let one = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
    let maj = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0]]).unwrap();
    for name in ["SMOTE", "BLSMOTE", "SLSMOTE", "DBSMOTE", "C-SMOTE"] {
        let params = ResamplerParams::defaults_for(name).unwrap();
        assert!(
            oversample(&params, &one, &maj, 3, &mut RngStream::new(0, "f")).is_err(),
            "{name}"
        );
    }
}

#[test]
fn borderline_seeds_are_danger_points() {
    let (x_min, x_maj) = imbalanced(6);
    let out = borderline_smote(&x_min, &x_maj, 3, 5, 2_000, &mut RngStream::new(7, "bl")).unwrap();
    assert_eq!(out.fallback, None);
    let labels = out.borderline_labels.clone().unwrap();
    assert_eq!(labels, borderline_labels(&x_min, &x_maj, 5).unwrap());
    for p in &out.provenance {
        let Provenance::Segment { from, .. } = *p else {
            panic!()
        };
        assert_eq!(labels[from], BorderlineLabel::Danger);
    }
    assert_provenance_geometry(&out, &x_min);
}

#[test]
fn borderline_labels_follow_majority_counts() {
    // minority point 0 has neighbours: 3 majority + 2 minority among its 5 nearest
    let x_min = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [0.0, -1.0], [50.0, 50.0]]).unwrap();
    let x_maj = Matrix::from_rows(&[
        [0.9, 0.0],
        [-0.9, 0.0],
        [0.0, 0.95],
        [49.0, 50.0],
        [51.0, 50.0],
        [50.0, 49.0],
        [50.0, 51.0],
        [50.5, 50.5],
    ])
    .unwrap();
    let labels = borderline_labels(&x_min, &x_maj, 5).unwrap();
    assert_eq!(labels[0], BorderlineLabel::Danger);
    assert_eq!(labels[3], BorderlineLabel::Noise);
    let out = borderline_smote(&x_min, &x_maj, 3, 5, 50, &mut RngStream::new(1, "b")).unwrap();
    for p in &out.provenance {
        let Provenance::Segment { from, .. } = *p else {
            panic!()
        };
        assert_ne!(from, 3);
    }
}

#[test]
fn borderline_falls_back_without_danger() {
    let mut rng = RngStream::new(8, "far");
    let x_min = blob(&[0.0, 0.0], 30, 1.0, &mut rng);
    let x_maj = blob(&[100.0, 100.0], 60, 1.0, &mut rng);
    let out = borderline_smote(&x_min, &x_maj, 3, 5, 25, &mut RngStream::new(9, "bl")).unwrap();
    assert_eq!(out.fallback, Some(Fallback::NoDangerPoints));
    assert_eq!(out.len(), 25);
    assert_provenance_geometry(&out, &x_min);
}

#[test]
fn safe_level_gaps_follow_the_case_table() {
    let (x_min, x_maj) = imbalanced(10);
    let sl = safe_levels(&x_min, &x_maj, 5).unwrap();
    let out = safe_level_smote(&x_min, &x_maj, 5, 5, 3_000, &mut RngStream::new(11, "sl")).unwrap();
    assert_provenance_geometry(&out, &x_min);
    for p in &out.provenance {
        match *p {
            Provenance::Segment { from, to, gap } => {
                let (s, t) = (sl[from] as f64, sl[to] as f64);
                assert!(s > 0.0 || t > 0.0, "both-unsafe pair used");
                if t == 0.0 {
                    assert_eq!(gap, 0.0);
                } else {
                    let ratio = s / t;
                    if ratio > 1.0 {
                        assert!(gap <= 1.0 / ratio + 1e-15);
                    } else if ratio < 1.0 {
                        assert!(gap >= 1.0 - ratio - 1e-15);
                    }
                }
            }
            Provenance::Copy { source } => assert!(sl[source] > 0),
            Provenance::Walk { .. } => panic!(),
        }
    }
}

#[test]
fn dbscan_separates_far_blobs() {
    let mut rng = RngStream::new(12, "db");
    let x = blob(&[0.0, 0.0], 50, 0.3, &mut rng)
        .vstack(&blob(&[20.0, 20.0], 50, 0.3, &mut rng))
        .unwrap();
    let a = dbscan(&x, 1.0, 4).unwrap();
    assert_eq!(a.n_clusters(), 2);
    assert!(a.labels[..50]
        .iter()
        .all(|&l| l == a.labels[0] && l != NOISE));
    assert!(a.labels[50..]
        .iter()
        .all(|&l| l == a.labels[50] && l != NOISE));
    assert!(dbscan(&x, 0.0, 4).is_err());
}

#[test]
fn dbsmote_dense_blob_stays_on_eps_edges() {
    let mut rng = RngStream::new(13, "blob");
    let x = blob(&[0.0, 0.0], 80, 1.0, &mut rng);
    let eps = third_quartile_knn_distance(&x, 5).unwrap();
    let out = dbsmote(
        &x,
        4,
        EpsRule::ThirdQuartileOfKthNeighbor { k: 5 },
        500,
        &mut RngStream::new(14, "d"),
    )
    .unwrap();
    assert_eq!(out.fallback, None);
    assert_provenance_geometry(&out, &x);
    let labels = dbscan(&x, eps, 4).unwrap().labels;
    for p in &out.provenance {
        if let Provenance::Segment { from, to, .. } = *p {
            let d = gmote_core::numcore::euclidean(x.row(from), x.row(to));
            assert!(d <= eps + 1e-12);
            assert_ne!(labels[from], NOISE);
            assert_ne!(labels[to], NOISE);
        }
    }
}

#[test]
fn dbsmote_two_point_cluster_uses_the_edge() {
    let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [50.0, 50.0], [-60.0, 10.0]]).unwrap();
    let out = dbsmote(
        &x,
        2,
        EpsRule::Fixed(1.5),
        40,
        &mut RngStream::new(2, "two"),
    )
    .unwrap();
    assert_eq!(out.fallback, None);
    for row in out.rows.rows() {
        assert!(row[1] == 0.0 && (0.0..=1.0).contains(&row[0]));
    }
}

#[test]
fn dbsmote_all_noise_falls_back() {
    let x = Matrix::from_rows(&[
        [0.0, 0.0],
        [10.0, 0.0],
        [0.0, 10.0],
        [10.0, 10.0],
        [5.0, 30.0],
    ])
    .unwrap();
    let out = dbsmote(&x, 4, EpsRule::Fixed(1.0), 12, &mut RngStream::new(3, "n")).unwrap();
    assert_eq!(out.fallback, Some(Fallback::NoClusters));
    assert_eq!(out.len(), 12);
    assert_provenance_geometry(&out, &x);
}

#[test]
fn cluster_smote_single_cluster_matches_smote_support() {
    let (x_min, _) = imbalanced(15);
    let out = cluster_smote(&x_min, 1, 3, 500, &mut RngStream::new(16, "c1")).unwrap();
    let nn = knn_within(&x_min, 3).unwrap();
    for p in &out.provenance {
        let Provenance::Segment { from, to, .. } = *p else {
            panic!()
        };
        assert!(nn.indices(from).contains(&to));
    }
}

#[test]
fn cluster_smote_stays_inside_clusters() {
    let mut rng = RngStream::new(17, "three");
    let x = blob(&[0.0, 0.0], 30, 0.5, &mut rng)
        .vstack(&blob(&[30.0, 0.0], 20, 0.5, &mut rng))
        .unwrap()
        .vstack(&blob(&[0.0, 30.0], 10, 0.5, &mut rng))
        .unwrap();
    let out = cluster_smote(&x, 3, 3, 600, &mut RngStream::new(18, "c3")).unwrap();
    assert_provenance_geometry(&out, &x);
    let group = |i: usize| i / 30 + usize::from(i >= 50);
    for p in &out.provenance {
        if let Provenance::Segment { from, to, .. } = *p {
            assert_eq!(group(from), group(to));
        }
    }
}

#[test]
fn kmeans_with_k_equal_n() {
    let x = Matrix::from_rows(&[[0.0], [5.0], [9.0], [20.0]]).unwrap();
    let a = kmeans(&x, 4, &mut RngStream::new(0, "k")).unwrap();
    let centers = a.centers.unwrap();
    for (i, &l) in a.labels.iter().enumerate() {
        assert_eq!(centers.row(l as usize), x.row(i));
    }
    assert!(kmeans(&x, 5, &mut RngStream::new(0, "k")).is_err());
}

#[test]
fn rbo_walks_descend() {
    let (x_min, x_maj) = imbalanced(19);
    let params = ResamplerParams::defaults_for("RBO").unwrap();
    let out = oversample(&params, &x_min, &x_maj, 200, &mut RngStream::new(20, "rbo")).unwrap();
    for p in &out.provenance {
        let Provenance::Walk {
            start_potential,
            end_potential,
            ..
        } = *p
        else {
            panic!()
        };
        assert!(end_potential <= start_potential);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn knn_distances_sorted_and_self_excluded(
        pts in prop::collection::vec(-10.0f64..10.0, 6..60),
        k in 1usize..5,
    ) {
        let n = pts.len() / 2;
        let x = Matrix::new(n, 2, pts[..2 * n].to_vec()).unwrap();
        let k = k.min(n - 1).max(1);
        prop_assume!(n >= 2);
        let nn = knn_index(&x, &x, k, SelfMatch::Aligned { offset: 0 }).unwrap();
        for i in 0..n {
            prop_assert!(!nn.indices(i).contains(&i));
            prop_assert!(nn.distances(i).windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn apportionment_is_exact(sizes in prop::collection::vec(0usize..50, 1..6), total in 0usize..500) {
        prop_assume!(sizes.iter().sum::<usize>() > 0);
        let q = largest_remainder(&sizes, total);
        prop_assert_eq!(q.iter().sum::<usize>(), total);
        let sum: usize = sizes.iter().sum();
        for (&s, &qi) in sizes.iter().zip(&q) {
            let exact = s as f64 * total as f64 / sum as f64;
            prop_assert!((qi as f64 - exact).abs() < 1.0);
        }
    }

    #[test]
    fn interpolators_stay_in_hull(seed in 0u64..1000, n in 1usize..80) {
        let (x_min, x_maj) = imbalanced(seed);
        for name in ["SMOTE", "BLSMOTE", "SLSMOTE", "DBSMOTE", "C-SMOTE"] {
            let params = ResamplerParams::defaults_for(name).unwrap();
            let out = oversample(&params, &x_min, &x_maj, n, &mut RngStream::new(seed, name)).unwrap();
            prop_assert_eq!(out.len(), n);
            assert_provenance_geometry(&out, &x_min);
        }
    }
}
