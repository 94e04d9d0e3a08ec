use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng as _;

use super::{factor_gram, stable_mean, GprModel, Hyperparameters, DEFAULT_MAX_EXACT_N};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{dot, Matrix};
use crate::seed::{derive_seed, derive_seed_index, rng_from_seed};

/// Negative log marginal likelihood of `y` (used as given, no mean shift)
/// and its gradient with respect to the log-domain hyperparameters
/// `(log σ_f, log σ_n, log ℓ_1, …)`.
pub fn nlml_and_grad(theta: &Hyperparameters, x: &Matrix, y: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (n, d) = (x.rows(), x.cols());
    if n == 0 || y.len() != n {
        return Err(arg_err!("{n} input rows for {} targets", y.len()));
    }
    if d != theta.dim() {
        return Err(Error::Dimension(format!("inputs have {d} columns, kernel has {} lengthscales", theta.dim())));
    }
    if !theta.is_finite() {
        return Err(Error::Numerical("non-finite hyperparameters".into()));
    }
    let inv_l: Vec<f64> = theta.log_lengthscales.iter().map(|l| (-l).exp()).collect();
    let z = Matrix::from_fn(n, d, |i, j| x[(i, j)] * inv_l[j]);
    let sf2 = (2.0 * theta.log_sigma_f).exp();
    let sn2 = (2.0 * theta.log_sigma_n).exp();
    // E = exp(-½‖z_i − z_j‖²), kept for the gradient
    let mut e = Matrix::zeros(n, n);
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        e[(i, i)] = 1.0;
        k[(i, i)] = sf2 + sn2;
        for j in 0..i {
            let q: f64 = z.row(i).iter().zip(z.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = (-0.5 * q).exp();
            e[(i, j)] = v;
            e[(j, i)] = v;
            k[(i, j)] = sf2 * v;
            k[(j, i)] = sf2 * v;
        }
    }
    let (chol, _) = factor_gram(&k)?;
    let alpha = chol.solve(y);
    let nlml = 0.5 * dot(y, &alpha) + chol.half_log_det() + 0.5 * n as f64 * (2.0 * PI).ln();
    let kinv = chol.inverse();
    // ½ tr((K⁻¹ − ααᵀ) ∂K/∂θ)
    let mut grad = vec![0.0; 2 + d];
    for i in 0..n {
        let w_ii = kinv[(i, i)] - alpha[i] * alpha[i];
        grad[0] += w_ii * sf2;
        grad[1] += w_ii * sn2;
        let zi = z.row(i);
        for j in 0..i {
            let w = (kinv[(i, j)] - alpha[i] * alpha[j]) * sf2 * e[(i, j)];
            grad[0] += 2.0 * w;
            for ((g, a), b) in grad[2..].iter_mut().zip(zi).zip(z.row(j)) {
                let diff = a - b;
                *g += w * diff * diff;
            }
        }
    }
    if !nlml.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical("non-finite marginal likelihood".into()));
    }
    Ok((nlml, grad))
}

/// Hyperparameter optimization settings.
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub restarts: usize,
    pub iterations: usize,
    /// Initial Adam step size, cosine-annealed to zero over `iterations`.
    pub learning_rate: f64,
    pub seed: u64,
    /// Training sets larger than this are rejected.
    pub max_exact_n: usize,
    /// When set, hyperparameters are optimized on a seeded subsample of at
    /// most this many rows; the returned model is conditioned on all rows.
    pub optimize_subsample: Option<usize>,
    /// Starting point of the first restart (warm start); later restarts use
    /// the data-driven defaults with random perturbation.
    pub initial: Option<Hyperparameters>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 5,
            iterations: 500,
            learning_rate: 0.05,
            seed: 0,
            max_exact_n: DEFAULT_MAX_EXACT_N,
            optimize_subsample: None,
            initial: None,
        }
    }
}

/// Outcome of hyperparameter optimization.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    /// Best NLML over all restarts (on the optimization rows).
    pub nlml: f64,
    pub restarts_attempted: usize,
    pub best_restart: usize,
    /// Optimizer iterations of the winning restart.
    pub iterations: usize,
    /// Gradient norm at the winning restart's last evaluated point.
    pub grad_norm: f64,
    /// Best NLML reached by each restart (`None` if it failed outright).
    pub restart_nlml: Vec<Option<f64>>,
    /// Rows used for optimization.
    pub optimization_rows: usize,
}

struct RestartResult {
    best_nlml: f64,
    best_theta: Vec<f64>,
    iterations: usize,
    grad_norm: f64,
}

fn adam(start: Vec<f64>, x: &Matrix, y: &[f64], config: &FitConfig) -> Option<RestartResult> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let p = start.len();
    let mut theta = start;
    let (mut m, mut v) = (vec![0.0; p], vec![0.0; p]);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut grad_norm = f64::NAN;
    let mut iterations = 0;
    for t in 0..=config.iterations {
        let Ok(hp) = Hyperparameters::from_slice(&theta) else { break };
        let Ok((f, g)) = nlml_and_grad(&hp, x, y) else { break };
        grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            best = Some((f, theta.clone()));
        }
        if t == config.iterations {
            break;
        }
        iterations = t + 1;
        let lr = 0.5 * config.learning_rate * (1.0 + (PI * t as f64 / config.iterations as f64).cos());
        let step = (t + 1) as i32;
        for k in 0..p {
            m[k] = BETA1 * m[k] + (1.0 - BETA1) * g[k];
            v[k] = BETA2 * v[k] + (1.0 - BETA2) * g[k] * g[k];
            let m_hat = m[k] / (1.0 - BETA1.powi(step));
            let v_hat = v[k] / (1.0 - BETA2.powi(step));
            theta[k] -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
    }
    best.map(|(best_nlml, best_theta)| RestartResult { best_nlml, best_theta, iterations, grad_norm })
}

fn population_std(y: &[f64]) -> f64 {
    let mean = stable_mean(y);
    (y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / y.len() as f64).sqrt()
}

/// Maximizes the marginal likelihood over the hyperparameters with
/// cosine-annealed Adam from several seeded starts and conditions the best
/// model on all data.
pub fn fit(x: &Matrix, y: &[f64], config: &FitConfig) -> Result<(GprModel, FitReport)> {
    let n = x.rows();
    if n < 2 || y.len() != n {
        return Err(arg_err!("fit needs at least 2 rows with matching targets ({n} rows, {} targets)", y.len()));
    }
    if n > config.max_exact_n {
        return Err(arg_err!(
            "{n} training rows exceed the exact-inference cap of {}; subsample or raise the cap",
            config.max_exact_n
        ));
    }
    if config.restarts == 0 {
        return Err(arg_err!("at least one restart is required"));
    }
    let d = x.cols();
    let (x_opt, y_opt) = match config.optimize_subsample {
        Some(m) if m < n => {
            if m < 2 {
                return Err(arg_err!("optimization subsample must have at least 2 rows"));
            }
            let mut rng = rng_from_seed(derive_seed(config.seed, "gpr-subsample"));
            let mut idx = sample(&mut rng, n, m).into_vec();
            idx.sort_unstable();
            let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            (x.select_rows(&idx), ys)
        }
        _ => (x.clone(), y.to_vec()),
    };
    let shift = stable_mean(&y_opt);
    let y_centered: Vec<f64> = y_opt.iter().map(|v| v - shift).collect();
    let scale = match population_std(y) {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let defaults = Hyperparameters::new(scale, 0.5 * scale, &vec![(d as f64).sqrt(); d]).to_vec();

    let mut best: Option<(usize, RestartResult)> = None;
    let mut restart_nlml = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts {
        let start = match (r, &config.initial) {
            (0, Some(init)) => {
                if init.dim() != d {
                    return Err(Error::Dimension(format!("initial hyperparameters have {} lengthscales", init.dim())));
                }
                init.to_vec()
            }
            (0, None) => defaults.clone(),
            _ => {
                let mut rng = rng_from_seed(derive_seed_index(config.seed, r as u64));
                defaults.iter().map(|v| v + rng.random_range(-1.0..=1.0)).collect()
            }
        };
        let outcome = adam(start, &x_opt, &y_centered, config);
        restart_nlml.push(outcome.as_ref().map(|o| o.best_nlml));
        if let Some(o) = outcome {
            if best.as_ref().is_none_or(|(_, b)| o.best_nlml < b.best_nlml) {
                best = Some((r, o));
            }
        }
    }
    let (best_restart, result) =
        best.ok_or_else(|| Error::Conditioning("every restart failed to factorize the kernel matrix".into()))?;
    let theta = Hyperparameters::from_slice(&result.best_theta)?;
    let model = GprModel::condition(x.clone(), y, theta)?;
    let report = FitReport {
        nlml: result.best_nlml,
        restarts_attempted: config.restarts,
        best_restart,
        iterations: result.iterations,
        grad_norm: result.grad_norm,
        restart_nlml,
        optimization_rows: x_opt.rows(),
    };
    Ok((model, report))
}
