use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-column affine standardization fitted on training rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviations.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &Matrix) -> Result<Self> {
        let (n, d) = (train.rows(), train.cols());
        if n == 0 {
            return Err(crate::error::arg_err!("cannot standardize an empty matrix"));
        }
        let mut mean = alloc::vec![0.0; d];
        for i in 0..n {
            for (m, x) in mean.iter_mut().zip(train.row(i)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = alloc::vec![0.0; d];
        for i in 0..n {
            for ((v, x), m) in var.iter_mut().zip(train.row(i)).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std: Vec<f64> = var.iter().map(|v| (v / n as f64).sqrt()).collect();
        if let Some(j) = std.iter().position(|s| !(*s > 0.0)) {
            return Err(Error::ZeroVariance(j + 1));
        }
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::Dimension(alloc::format!(
                "scaler has {} columns, input has {}",
                self.dim(),
                x.cols()
            )));
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - self.mean[j]) / self.std[j]))
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect()
    }
}

/// Standardizes `train` and `apply` with statistics of `train` only.
/// Zero-variance columns are reported by 1-based component index.
pub fn standardize_scores(train: &Matrix, apply: &Matrix) -> Result<(Matrix, Matrix, Standardizer)> {
    let scaler = Standardizer::fit(train)?;
    Ok((scaler.apply(train)?, scaler.apply(apply)?, scaler))
}
