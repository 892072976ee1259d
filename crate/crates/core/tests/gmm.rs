use gmote_core::gmm::{
    bic_value, default_c_range, em_fit, gmm_loglik, gmm_sample, param_count, select_by_bic,
    select_by_bic_detailed, EmConfig, GaussianComponent, GmmModel,
};
use gmote_core::numcore::{cholesky, mvn_logpdf};
use gmote_core::{Matrix, RngStream};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian_blob(center: &[f64], n: usize, scale: f64, rng: &mut RngStream) -> Matrix {
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

/// Direct mixture log-likelihood without log-sum-exp.
fn naive_loglik(model: &GmmModel, x: &Matrix) -> f64 {
    x.rows()
        .map(|row| {
            model
                .components()
                .iter()
                .map(|c| c.weight() * mvn_logpdf(row, c.mean(), c.cholesky()).unwrap().exp())
                .sum::<f64>()
                .ln()
        })
        .sum()
}

#[test]
fn single_component_is_closed_form() {
    let mut rng = RngStream::new(1, "data");
    let x = gaussian_blob(&[1.0, -2.0, 0.5], 150, 1.5, &mut rng);
    let model = em_fit(&x, 1, &EmConfig::default(), &RngStream::new(2, "em")).unwrap();
    let comp = &model.components()[0];
    for (a, b) in comp.mean().iter().zip(x.column_means()) {
        assert!((a - b).abs() < 1e-12);
    }
    let cov = x.covariance_mle();
    assert!(comp.covariance().sub(&cov).unwrap().frobenius_norm() < 1e-10);
    let chol = cholesky(&cov, 0.0).unwrap();
    let mean = x.column_means();
    let closed: f64 = x.rows().map(|r| mvn_logpdf(r, &mean, &chol).unwrap()).sum();
    assert!((model.log_likelihood() - closed).abs() < 1e-10);
    assert_eq!(model.param_count(), param_count(1, 3));
    assert!((model.bic() - bic_value(closed, 9, 150)).abs() < 1e-8);
}

#[test]
fn two_clusters_are_recovered() {
    let mut rng = RngStream::new(7, "data");
    let x = gaussian_blob(&[0.0, 0.0], 200, 1.0, &mut rng)
        .vstack(&gaussian_blob(&[10.0, 10.0], 200, 1.0, &mut rng))
        .unwrap();
    let model = em_fit(&x, 2, &EmConfig::default(), &RngStream::new(8, "em")).unwrap();
    for center in [[0.0, 0.0], [10.0, 10.0]] {
        let best = model
            .components()
            .iter()
            .map(|c| {
                c.mean()
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 0.3, "{best}");
    }
    let total: f64 = model.components().iter().map(|c| c.weight()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_small_input_completes() {
    let x = Matrix::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, 5.5]]).unwrap();
    let model = em_fit(&x, 2, &EmConfig::default(), &RngStream::new(0, "d")).unwrap();
    assert_eq!(model.n_components(), 2);
    assert!(model.log_likelihood().is_finite());
}

#[test]
fn too_many_components_rejected() {
    let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
    assert!(em_fit(&x, 3, &EmConfig::default(), &RngStream::new(0, "d")).is_err());
    assert!(em_fit(
        &Matrix::with_cols(2),
        1,
        &EmConfig::default(),
        &RngStream::new(0, "d")
    )
    .is_err());
}

#[test]
fn loglik_matches_naive_summation_and_is_additive() {
    let mut rng = RngStream::new(11, "data");
    let x = gaussian_blob(&[0.0, 3.0], 80, 2.0, &mut rng);
    let model = em_fit(&x, 3, &EmConfig::default(), &RngStream::new(12, "em")).unwrap();
    let ll = gmm_loglik(&model, &x).unwrap();
    assert!((ll - naive_loglik(&model, &x)).abs() < 1e-9);
    assert!((ll - model.log_likelihood()).abs() < 1e-8 * ll.abs().max(1.0));
    let doubled = x.vstack(&x).unwrap();
    assert!((gmm_loglik(&model, &doubled).unwrap() - 2.0 * ll).abs() < 1e-9 * ll.abs());
}

#[test]
fn loglik_at_identity_mode() {
    let comp = GaussianComponent::new(1.0, vec![0.0, 0.0], Matrix::identity(2)).unwrap();
    let model = GmmModel::from_components(vec![comp], 1).unwrap();
    let ll = gmm_loglik(&model, &Matrix::from_rows(&[[0.0, 0.0]]).unwrap()).unwrap();
    assert!((ll + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
}

#[test]
fn loglik_is_permutation_invariant() {
    let mut rng = RngStream::new(5, "data");
    let x = gaussian_blob(&[0.0, 0.0, 0.0], 60, 1.0, &mut rng);
    let model = em_fit(&x, 3, &EmConfig::default(), &RngStream::new(6, "em")).unwrap();
    let mut comps = model.components().to_vec();
    comps.reverse();
    let swapped = GmmModel::from_components(comps, 60).unwrap();
    let rev_rows: Vec<usize> = (0..60).rev().collect();
    let x_rev = x.select_rows(&rev_rows);
    let ll = gmm_loglik(&model, &x).unwrap();
    assert_eq!(ll, gmm_loglik(&swapped, &x).unwrap());
    assert_eq!(ll, gmm_loglik(&model, &x_rev).unwrap());
}

#[test]
fn em_traces_are_monotone_on_random_data() {
    let mut meta = RngStream::new(2024, "meta");
    for case in 0..100 {
        let n = meta.random_range(10..=300);
        let m = meta.random_range(1..=5);
        let c = meta.random_range(1..=3usize).min(n);
        let mut rng = RngStream::new(case, "data");
        let mut x = Matrix::with_cols(m);
        for _ in 0..n {
            let shift = if rng.random_bool(0.4) { 4.0 } else { 0.0 };
            let row: Vec<f64> = (0..m)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z + shift
                })
                .collect();
            x.push_row(&row).unwrap();
        }
        let model = em_fit(&x, c, &EmConfig::default(), &RngStream::new(case, "em")).unwrap();
        for trace in model.traces() {
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-8, "case {case}: {} -> {}", w[0], w[1]);
            }
        }
        let total: f64 = model.components().iter().map(|c| c.weight()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bic_formula_and_penalty() {
    let ll = -123.4;
    assert!((bic_value(ll, 2, 100) - (-2.0 * ll + 2.0 * 100f64.ln())).abs() < 1e-12);
    assert!(bic_value(ll, 5, 100) > bic_value(ll, 4, 100));
    assert_eq!(param_count(2, 3), 1 + 6 + 12);
}

#[test]
fn default_range_rules() {
    assert_eq!(default_c_range(2, 5), vec![1]);
    assert_eq!(default_c_range(40, 3), vec![1, 2, 3, 4, 5, 6, 7, 8]);
    assert_eq!(default_c_range(1000, 2).len(), 9);
}

#[test]
fn single_gaussian_prefers_one_component() {
    let mut wins_vs_three = 0;
    let mut selects_one = 0;
    for seed in 0..20 {
        let mut rng = RngStream::new(seed, "single");
        let x = gaussian_blob(&[0.0, 0.0], 500, 1.0, &mut rng);
        let sel = select_by_bic_detailed(
            &x,
            &[1, 2, 3, 4, 5],
            &EmConfig::default(),
            &RngStream::new(seed, "bic"),
        )
        .unwrap();
        let bic_of = |c: usize| sel.candidates.iter().find(|m| m.0 == c).unwrap().1;
        if bic_of(1) < bic_of(3) {
            wins_vs_three += 1;
        }
        if sel.best.n_components() == 1 {
            selects_one += 1;
        }
        for cand in &sel.candidates {
            assert!(sel.best.bic() <= cand.1);
        }
    }
    assert!(wins_vs_three >= 18, "{wins_vs_three}");
    assert!(selects_one >= 18, "{selects_one}");
}

#[test]
fn separated_pair_selects_two() {
    let mut hits = 0;
    for seed in 0..20 {
        let mut rng = RngStream::new(seed, "pair");
        let x = gaussian_blob(&[0.0, 0.0], 250, 1.0, &mut rng)
            .vstack(&gaussian_blob(&[6.0, 0.0], 250, 1.0, &mut rng))
            .unwrap();
        let best = select_by_bic(
            &x,
            &[1, 2, 3, 4, 5],
            &EmConfig::default(),
            &RngStream::new(seed, "bic"),
        )
        .unwrap();
        if best.n_components() == 2 {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits}");
}

#[test]
fn singleton_range_returns_that_count() {
    let mut rng = RngStream::new(3, "d");
    let x = gaussian_blob(&[0.0], 50, 1.0, &mut rng);
    let best = select_by_bic(&x, &[3], &EmConfig::default(), &RngStream::new(0, "b")).unwrap();
    assert_eq!(best.n_components(), 3);
}

#[test]
fn sampling_frequencies_follow_weights() {
    let a = GaussianComponent::new(0.3, vec![-100.0], Matrix::identity(1)).unwrap();
    let b = GaussianComponent::new(0.7, vec![100.0], Matrix::identity(1)).unwrap();
    let model = GmmModel::from_components(vec![a, b], 10).unwrap();
    let draws = gmm_sample(&model, 100_000, &mut RngStream::new(9, "freq")).unwrap();
    let left = draws.rows().filter(|r| r[0] < 0.0).count() as f64 / 100_000.0;
    assert!((left - 0.3).abs() < 0.01, "{left}");
    let empty = gmm_sample(&model, 0, &mut RngStream::new(9, "freq")).unwrap();
    assert_eq!((empty.n_rows(), empty.n_cols()), (0, 1));
}
