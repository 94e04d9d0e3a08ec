//! Exact Gaussian process regression with an ARD squared-exponential kernel.

mod metrics;
mod optimize;

pub use metrics::{mae, metrics, Metrics};
pub use optimize::{fit, nlml_and_grad, FitConfig, FitReport};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, Matrix};

/// First rung of the diagonal jitter ladder.
pub const JITTER_START: f64 = 1e-10;
/// Last rung of the diagonal jitter ladder.
pub const JITTER_MAX: f64 = 1e-4;
/// Default cap on the exact training-set size.
pub const DEFAULT_MAX_EXACT_N: usize = 8192;

/// Kernel hyperparameters in log domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparameters {
    pub log_sigma_f: f64,
    pub log_sigma_n: f64,
    pub log_lengthscales: Vec<f64>,
}

impl Hyperparameters {
    pub fn new(sigma_f: f64, sigma_n: f64, lengthscales: &[f64]) -> Self {
        Self {
            log_sigma_f: sigma_f.ln(),
            log_sigma_n: sigma_n.ln(),
            log_lengthscales: lengthscales.iter().map(|l| l.ln()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.log_lengthscales.len()
    }

    pub fn sigma_f(&self) -> f64 {
        self.log_sigma_f.exp()
    }

    pub fn sigma_n(&self) -> f64 {
        self.log_sigma_n.exp()
    }

    pub fn lengthscales(&self) -> Vec<f64> {
        self.log_lengthscales.iter().map(|l| l.exp()).collect()
    }

    /// Flat parameter vector `(log σ_f, log σ_n, log ℓ_1, …)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 + self.dim());
        v.push(self.log_sigma_f);
        v.push(self.log_sigma_n);
        v.extend_from_slice(&self.log_lengthscales);
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() < 2 {
            return Err(crate::error::arg_err!("hyperparameter vector needs at least 2 entries"));
        }
        Ok(Self { log_sigma_f: v[0], log_sigma_n: v[1], log_lengthscales: v[2..].to_vec() })
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }

    /// `σ_f² + σ_n²`, the prior variance of a noisy observation.
    pub fn prior_variance(&self) -> f64 {
        (2.0 * self.log_sigma_f).exp() + (2.0 * self.log_sigma_n).exp()
    }
}

/// ARD-SE covariance; the noise term is added only when `same_point` is set.
pub fn kernel(x: &[f64], x_prime: &[f64], theta: &Hyperparameters, same_point: bool) -> f64 {
    debug_assert_eq!(x.len(), theta.dim());
    let sf2 = (2.0 * theta.log_sigma_f).exp();
    let mut q = 0.0;
    for ((a, b), l) in x.iter().zip(x_prime).zip(&theta.log_lengthscales) {
        let d = (a - b) * (-l).exp();
        q += d * d;
    }
    let noise = if same_point { (2.0 * theta.log_sigma_n).exp() } else { 0.0 };
    sf2 * (-0.5 * q).exp() + noise
}

fn scaled_inputs(x: &Matrix, theta: &Hyperparameters) -> Matrix {
    let inv: Vec<f64> = theta.log_lengthscales.iter().map(|l| (-l).exp()).collect();
    Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] * inv[j])
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Same-set Gram matrix including the noise diagonal.
pub fn gram(x: &Matrix, theta: &Hyperparameters) -> Matrix {
    let n = x.rows();
    let z = scaled_inputs(x, theta);
    let sf2 = (2.0 * theta.log_sigma_f).exp();
    let sn2 = (2.0 * theta.log_sigma_n).exp();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = sf2 + sn2;
        for j in 0..i {
            let v = sf2 * (-0.5 * sq_dist(z.row(i), z.row(j))).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Cross-covariance `K(x_a, x_b)` without noise (`rows(a) × rows(b)`).
pub fn cross_gram(a: &Matrix, b: &Matrix, theta: &Hyperparameters) -> Matrix {
    let za = scaled_inputs(a, theta);
    let zb = scaled_inputs(b, theta);
    let sf2 = (2.0 * theta.log_sigma_f).exp();
    Matrix::from_fn(a.rows(), b.rows(), |i, j| sf2 * (-0.5 * sq_dist(za.row(i), zb.row(j))).exp())
}

/// Mean computed relative to the first value, exact for constant data.
pub(crate) fn stable_mean(y: &[f64]) -> f64 {
    let first = y[0];
    first + y.iter().map(|v| v - first).sum::<f64>() / y.len() as f64
}

/// Cholesky of `K` with the jitter ladder; returns the jitter used.
pub(crate) fn factor_gram(k: &Matrix) -> Result<(Cholesky, f64)> {
    Cholesky::with_jitter(k, JITTER_START, JITTER_MAX)
}

/// Conditioned GP: training data, factorization and `α = K⁻¹(y − shift)`.
#[derive(Clone, Debug)]
pub struct GprModel {
    theta: Hyperparameters,
    x: Matrix,
    y: Vec<f64>,
    mean_shift: f64,
    chol: Cholesky,
    alpha: Vec<f64>,
    jitter: f64,
}

impl GprModel {
    /// Conditions a GP with fixed hyperparameters on `(x, y)`.
    pub fn condition(x: Matrix, y: &[f64], theta: Hyperparameters) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Dimension(format!("{} input rows, {} targets", x.rows(), y.len())));
        }
        if x.rows() == 0 {
            return Err(crate::error::arg_err!("no training data"));
        }
        if x.cols() != theta.dim() {
            return Err(Error::Dimension(format!(
                "inputs have {} columns, kernel has {} lengthscales",
                x.cols(),
                theta.dim()
            )));
        }
        if !theta.is_finite() {
            return Err(Error::Numerical("non-finite hyperparameters".into()));
        }
        let mean_shift = stable_mean(y);
        let centered: Vec<f64> = y.iter().map(|v| v - mean_shift).collect();
        let (chol, jitter) = factor_gram(&gram(&x, &theta))?;
        let alpha = chol.solve(&centered);
        Ok(Self { theta, x, y: y.to_vec(), mean_shift, chol, alpha, jitter })
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.theta
    }

    pub fn inputs(&self) -> &Matrix {
        &self.x
    }

    /// Training targets as given (before the mean shift).
    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn mean_shift(&self) -> f64 {
        self.mean_shift
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn n_train(&self) -> usize {
        self.x.rows()
    }

    /// Predictive mean and variance (noise included) at each row of `x_star`.
    pub fn predict(&self, x_star: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
        if x_star.cols() != self.theta.dim() {
            return Err(Error::Dimension(format!(
                "test inputs have {} columns, model expects {}",
                x_star.cols(),
                self.theta.dim()
            )));
        }
        let prior = self.theta.prior_variance();
        let ks = cross_gram(&self.x, x_star, &self.theta);
        let n = self.n_train();
        let mut mean = Vec::with_capacity(x_star.rows());
        let mut var = Vec::with_capacity(x_star.rows());
        let mut col = vec![0.0; n];
        for j in 0..x_star.rows() {
            for (i, c) in col.iter_mut().enumerate() {
                *c = ks[(i, j)];
            }
            mean.push(self.mean_shift + dot(&col, &self.alpha));
            self.chol.solve_lower_in_place(&mut col);
            let v = prior - dot(&col, &col);
            if v < -1e-12 * prior.max(1.0) {
                return Err(Error::Numerical(format!("negative predictive variance {v:e}")));
            }
            var.push(v.max(0.0));
        }
        Ok((mean, var))
    }
}

#[cfg(test)]
mod tests;
