use super::*;
use alloc::vec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(n: usize, d: usize, seed: u64) -> (Matrix, Vec<f64>, Hyperparameters) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Matrix::from_fn(n, d, |_, _| rng.random_range(-2.0..2.0));
    let y = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let theta = Hyperparameters {
        log_sigma_f: rng.random_range(-1.0..1.0),
        log_sigma_n: rng.random_range(-3.0..-1.0),
        log_lengthscales: (0..d).map(|_| rng.random_range(-0.5..1.0)).collect(),
    };
    (x, y, theta)
}

/// Largest component error relative to the finite-difference gradient norm.
fn gradient_error(theta: &Hyperparameters, x: &Matrix, y: &[f64]) -> f64 {
    let (_, g) = nlml_and_grad(theta, x, y).unwrap();
    let base = theta.to_vec();
    let h = 1e-5;
    let mut fd = vec![0.0; base.len()];
    for k in 0..base.len() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += h;
        minus[k] -= h;
        let fp = nlml_and_grad(&Hyperparameters::from_slice(&plus).unwrap(), x, y).unwrap().0;
        let fm = nlml_and_grad(&Hyperparameters::from_slice(&minus).unwrap(), x, y).unwrap().0;
        fd[k] = (fp - fm) / (2.0 * h);
    }
    let scale = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-8);
    g.iter().zip(&fd).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max)
}

#[test]
fn kernel_examples() {
    let theta = Hyperparameters::new(1.5, 0.2, &[1.0, 2.0]);
    let x = [0.3, -0.1];
    assert!((kernel(&x, &x, &theta, true) - (2.25 + 0.04)).abs() < 1e-14);
    assert!(kernel(&x, &[1e6, 0.0], &theta, false).abs() < 1e-300);
    let t1 = Hyperparameters::new(1.0, 1e-300, &[1.0]);
    assert!((kernel(&[0.0], &[1.0], &t1, false) - 0.606_530_659_712_633_4).abs() < 1e-15);
    let t0 = Hyperparameters { log_sigma_f: 0.0, log_sigma_n: f64::NEG_INFINITY, log_lengthscales: vec![0.0] };
    assert!((kernel(&[0.0], &[1.0], &t0, true) - (-0.5f64).exp()).abs() < 1e-15);
}

#[test]
fn gram_is_symmetric_and_positive_definite() {
    let (x, _, theta) = random_problem(30, 4, 1);
    let k = gram(&x, &theta);
    let kt = k.transpose();
    assert!(k.max_abs_diff(&kt) <= 1e-14);
    assert!(crate::linalg::Cholesky::new(&k).is_some());
    let c = cross_gram(&x, &x, &theta);
    for i in 0..30 {
        assert!((c[(i, i)] + theta.sigma_n().powi(2) - k[(i, i)]).abs() < 1e-14);
    }
}

#[test]
fn scalar_nlml_closed_form() {
    let theta = Hyperparameters::new(0.7, 0.3, &[2.0]);
    let x = Matrix::from_vec(1, 1, vec![0.5]).unwrap();
    let (f, _) = nlml_and_grad(&theta, &x, &[0.0]).unwrap();
    let expected = 0.5 * (0.49f64 + 0.09).ln() + 0.5 * (2.0 * core::f64::consts::PI).ln();
    assert!((f - expected).abs() < 1e-14);
}

#[test]
fn zero_targets_leave_only_determinant_terms() {
    let (x, _, theta) = random_problem(12, 2, 3);
    let y = vec![0.0; 12];
    let (f, _) = nlml_and_grad(&theta, &x, &y).unwrap();
    let (chol, _) = factor_gram(&gram(&x, &theta)).unwrap();
    let expected = chol.half_log_det() + 6.0 * (2.0 * core::f64::consts::PI).ln();
    assert!((f - expected).abs() < 1e-12);
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..50 {
        let (x, y, theta) = random_problem(20, 3, seed);
        let err = gradient_error(&theta, &x, &y);
        assert!(err <= 1e-4, "seed {seed}: {err:e}");
    }
}

#[test]
fn fit_interpolates_noiseless_quadratic() {
    let xs: Vec<f64> = (0..15).map(|i| -1.0 + 2.0 * i as f64 / 14.0).collect();
    let x = Matrix::from_vec(15, 1, xs.clone()).unwrap();
    let y: Vec<f64> = xs.iter().map(|v| v * v).collect();
    let config = FitConfig { seed: 4, ..FitConfig::default() };
    let (model, report) = fit(&x, &y, &config).unwrap();
    let (mean, _) = model.predict(&x).unwrap();
    for (m, t) in mean.iter().zip(&y) {
        assert!((m - t).abs() <= 1e-4, "{m} vs {t}");
    }
    assert!(model.hyperparameters().sigma_n() < 1e-2);
    for r in report.restart_nlml.iter().flatten() {
        assert!(report.nlml <= *r);
    }
    assert_eq!(report.restarts_attempted, 5);
}

#[test]
fn fit_is_deterministic() {
    let (x, y, _) = random_problem(25, 2, 8);
    let config = FitConfig { iterations: 60, restarts: 3, seed: 11, ..FitConfig::default() };
    let (a, ra) = fit(&x, &y, &config).unwrap();
    let (b, rb) = fit(&x, &y, &config).unwrap();
    assert_eq!(a.hyperparameters(), b.hyperparameters());
    assert_eq!(ra, rb);
}

#[test]
fn constant_targets_shrink_signal_variance() {
    let (x, _, _) = random_problem(10, 2, 5);
    let y = vec![0.4; 10];
    let config = FitConfig { iterations: 400, restarts: 2, seed: 1, ..FitConfig::default() };
    let (model, report) = fit(&x, &y, &config).unwrap();
    assert!(model.hyperparameters().sigma_f() < 1e-3);
    let (mean, _) = model.predict(&x).unwrap();
    assert!(mean.iter().all(|m| (m - 0.4).abs() < 1e-9));
    // the centered targets vanish, so only determinant and constant remain
    let (chol, _) = factor_gram(&gram(&x, model.hyperparameters())).unwrap();
    let expected = chol.half_log_det() + 5.0 * (2.0 * core::f64::consts::PI).ln();
    assert!((report.nlml - expected).abs() < 1e-8 * expected.abs());
    // with σ_f ≪ σ_n the objective tends to N(½ log σ_n² + ½ log 2π)
    let theta = Hyperparameters::new(1e-8, 1e-2, &[1.0, 1.0]);
    let (f, _) = nlml_and_grad(&theta, &x, &[0.0; 10]).unwrap();
    let limit = 10.0 * (0.5 * 1e-4f64.ln() + 0.5 * (2.0 * core::f64::consts::PI).ln());
    assert!((f - limit).abs() < 1e-6);
}

#[test]
fn training_points_are_interpolated_without_noise() {
    let (x, y, mut theta) = random_problem(15, 3, 9);
    theta.log_sigma_n = (1e-7f64).ln();
    let model = GprModel::condition(x.clone(), &y, theta).unwrap();
    let (mean, var) = model.predict(&x).unwrap();
    for (m, t) in mean.iter().zip(&y) {
        assert!((m - t).abs() <= 1e-6);
    }
    assert!(var.iter().all(|&v| v <= model.hyperparameters().prior_variance()));
}

#[test]
fn far_field_reverts_to_prior() {
    let (x, y, theta) = random_problem(15, 3, 10);
    let model = GprModel::condition(x, &y, theta.clone()).unwrap();
    let far = Matrix::from_vec(1, 3, vec![1e3, -1e3, 1e3]).unwrap();
    let (mean, var) = model.predict(&far).unwrap();
    assert!((mean[0] - model.mean_shift()).abs() < 1e-12);
    assert!((var[0] - theta.prior_variance()).abs() <= 1e-6);
}

#[test]
fn predict_rejects_wrong_dimension() {
    let (x, y, theta) = random_problem(5, 3, 2);
    let model = GprModel::condition(x, &y, theta).unwrap();
    assert!(matches!(model.predict(&Matrix::zeros(1, 2)), Err(Error::Dimension(_))));
}

#[test]
fn exact_cap_and_subsampling() {
    let (x, y, _) = random_problem(40, 2, 12);
    let capped = FitConfig { max_exact_n: 30, ..FitConfig::default() };
    assert!(matches!(fit(&x, &y, &capped), Err(Error::Argument(_))));
    let sub = FitConfig { optimize_subsample: Some(15), iterations: 30, restarts: 1, ..FitConfig::default() };
    let (model, report) = fit(&x, &y, &sub).unwrap();
    assert_eq!(report.optimization_rows, 15);
    assert_eq!(model.n_train(), 40);
}

#[test]
fn conditioning_failure_is_reported() {
    // duplicated inputs with zero noise and enormous signal variance
    let x = Matrix::from_vec(3, 1, vec![0.0, 0.0, 0.0]).unwrap();
    let theta = Hyperparameters { log_sigma_f: 30.0, log_sigma_n: f64::NEG_INFINITY, log_lengthscales: vec![0.0] };
    assert!(matches!(GprModel::condition(x.clone(), &[1.0, 2.0, 3.0], theta.clone()), Err(Error::Numerical(_))));
    let finite = Hyperparameters { log_sigma_n: -300.0, ..theta };
    assert!(matches!(GprModel::condition(x, &[1.0, 2.0, 3.0], finite), Err(Error::Conditioning(_))));
}

#[test]
fn metric_examples() {
    let m = metrics(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
    assert_eq!((m.mae, m.nmae), (0.5, 0.5));
    let perfect = metrics(&[0.1, 0.4, 0.3], &[0.1, 0.4, 0.3]).unwrap();
    assert_eq!((perfect.mae, perfect.r2), (0.0, 1.0));
    assert!(matches!(metrics(&[2.0, 2.0], &[1.0, 2.0]), Err(Error::UndefinedMetric(_))));
    assert!(mae(&[1.0], &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prediction_is_permutation_invariant(seed in any::<u64>(), shift in 1usize..10) {
        let (x, y, theta) = random_problem(12, 3, seed);
        let perm: Vec<usize> = (0..12).map(|i| (i + shift) % 12).collect();
        let xp = x.select_rows(&perm);
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let (test, _, _) = random_problem(6, 3, seed ^ 1);
        let a = GprModel::condition(x, &y, theta.clone()).unwrap().predict(&test).unwrap();
        let b = GprModel::condition(xp, &yp, theta).unwrap().predict(&test).unwrap();
        for k in 0..6 {
            prop_assert!((a.0[k] - b.0[k]).abs() <= 1e-10);
            prop_assert!((a.1[k] - b.1[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn adding_a_point_never_increases_variance(seed in any::<u64>()) {
        let (x, y, theta) = random_problem(11, 2, seed);
        let (test, _, _) = random_problem(8, 2, seed ^ 7);
        let small = GprModel::condition(x.select_rows(&(0..10).collect::<Vec<_>>()), &y[..10], theta.clone()).unwrap();
        let large = GprModel::condition(x, &y, theta).unwrap();
        let (_, v0) = small.predict(&test).unwrap();
        let (_, v1) = large.predict(&test).unwrap();
        for (a, b) in v0.iter().zip(&v1) {
            prop_assert!(*b <= *a + 1e-10);
        }
    }

    #[test]
    fn nmae_is_mae_over_range(values in proptest::collection::vec(-5.0f64..5.0, 2..20), noise in -1.0f64..1.0) {
        let pred: Vec<f64> = values.iter().enumerate().map(|(i, v)| v + noise * (i as f64).sin()).collect();
        if let Ok(m) = metrics(&values, &pred) {
            let range = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - values.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(m.nmae, m.mae / range);
        }
    }
}
