use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gpr::{GprModel, Hyperparameters};
use crate::linalg::Matrix;

/// GP posterior over every candidate for fixed hyperparameters, extended one
/// labeled point at a time.
///
/// Keeps `V = L⁻¹ K(X_l, X_all)` row by row together with the running sums
/// `Σ V²`, `Vᵀ L⁻¹y` and `Vᵀ L⁻¹1`, so adding a point costs `O(n·N)`.
pub(crate) struct PoolPosterior {
    theta: Hyperparameters,
    z: Matrix,
    sf2: f64,
    sn2: f64,
    jitter: f64,
    labeled: Vec<usize>,
    y: Vec<f64>,
    v: Vec<Vec<f64>>,
    z_y: Vec<f64>,
    z_1: Vec<f64>,
    s_y: Vec<f64>,
    s_1: Vec<f64>,
    s_v: Vec<f64>,
}

impl PoolPosterior {
    /// Rebuilds from a model conditioned on `x_all[labeled]` in that order.
    pub fn build(model: &GprModel, x_all: &Matrix, labeled: &[usize], y: &[f64]) -> Result<Self> {
        let theta = model.hyperparameters().clone();
        let inv_l: Vec<f64> = theta.log_lengthscales.iter().map(|l| (-l).exp()).collect();
        let z = Matrix::from_fn(x_all.rows(), x_all.cols(), |i, j| x_all[(i, j)] * inv_l[j]);
        let n_all = x_all.rows();
        let mut post = Self {
            sf2: (2.0 * theta.log_sigma_f).exp(),
            sn2: (2.0 * theta.log_sigma_n).exp(),
            jitter: model.jitter(),
            theta,
            z,
            labeled: Vec::with_capacity(labeled.len()),
            y: Vec::with_capacity(labeled.len()),
            v: Vec::with_capacity(labeled.len()),
            z_y: Vec::new(),
            z_1: Vec::new(),
            s_y: vec![0.0; n_all],
            s_1: vec![0.0; n_all],
            s_v: vec![0.0; n_all],
        };
        let l = model.cholesky().factor();
        for (i, &p) in labeled.iter().enumerate() {
            let mut row = post.kernel_row(p);
            for (k, vk) in post.v.iter().enumerate() {
                let lik = l[(i, k)];
                for (r, &x) in row.iter_mut().zip(vk) {
                    *r -= lik * x;
                }
            }
            let d = l[(i, i)];
            row.iter_mut().for_each(|r| *r /= d);
            post.push_row(p, y[i], row, d);
        }
        Ok(post)
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.theta
    }

    fn kernel_row(&self, p: usize) -> Vec<f64> {
        let zp = self.z.row(p);
        (0..self.z.rows())
            .map(|j| {
                let q: f64 = zp.iter().zip(self.z.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                self.sf2 * (-0.5 * q).exp()
            })
            .collect()
    }

    fn push_row(&mut self, p: usize, y_p: f64, row: Vec<f64>, d: f64) {
        let lv: Vec<f64> = self.v.iter().map(|vk| vk[p]).collect();
        let zy = (y_p - lv.iter().zip(&self.z_y).map(|(a, b)| a * b).sum::<f64>()) / d;
        let z1 = (1.0 - lv.iter().zip(&self.z_1).map(|(a, b)| a * b).sum::<f64>()) / d;
        for (j, &r) in row.iter().enumerate() {
            self.s_y[j] += r * zy;
            self.s_1[j] += r * z1;
            self.s_v[j] += r * r;
        }
        self.z_y.push(zy);
        self.z_1.push(z1);
        self.v.push(row);
        self.labeled.push(p);
        self.y.push(y_p);
    }

    /// Adds candidate `p` with target `y_p` to the conditioning set.
    pub fn add(&mut self, p: usize, y_p: f64) -> Result<()> {
        let lv: Vec<f64> = self.v.iter().map(|vk| vk[p]).collect();
        let d2 = self.sf2 + self.sn2 + self.jitter - lv.iter().map(|x| x * x).sum::<f64>();
        if !(d2 > 0.0) {
            return Err(Error::Conditioning(format!("pivot {d2:e} when adding candidate {p}")));
        }
        let d = d2.sqrt();
        let mut row = self.kernel_row(p);
        for (vk, &lk) in self.v.iter().zip(&lv) {
            for (r, &x) in row.iter_mut().zip(vk) {
                *r -= lk * x;
            }
        }
        row.iter_mut().for_each(|r| *r /= d);
        self.push_row(p, y_p, row, d);
        Ok(())
    }

    fn shift(&self) -> f64 {
        crate::gpr::stable_mean(&self.y)
    }

    /// Predictive means and variances for candidates `idx`.
    pub fn predict(&self, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let c = self.shift();
        let prior = self.sf2 + self.sn2;
        let mean = idx.iter().map(|&j| c + self.s_y[j] - c * self.s_1[j]).collect();
        let var = idx.iter().map(|&j| (prior - self.s_v[j]).max(0.0)).collect();
        (mean, var)
    }
}
