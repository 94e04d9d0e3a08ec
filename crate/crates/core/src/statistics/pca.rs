use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use super::RowSource;
use crate::error::{arg_err, Error, Result};
use crate::linalg::{jacobi_svd, thin_q, Matrix};
use crate::seed::rng_from_seed;

pub const RANDOMIZED_OVERSAMPLING: usize = 10;
pub const RANDOMIZED_POWER_ITERATIONS: usize = 4;

/// Truncated principal-component model.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    /// Ensemble mean `f̄`, one entry per feature.
    pub mean: Vec<f64>,
    /// Orthonormal basis vectors as rows (`rank × features`).
    pub basis: Matrix,
    /// Variance captured by each component, non-increasing.
    pub explained_variance: Vec<f64>,
    /// Total variance of the centered training data (sum over features).
    pub total_variance: f64,
}

impl PcaModel {
    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    /// Copy keeping only the leading `n` components.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.rank() {
            return Err(arg_err!("cannot truncate a rank-{} model to {n} components", self.rank()));
        }
        let data = self.basis.as_slice()[..n * self.n_features()].to_vec();
        Ok(Self {
            mean: self.mean.clone(),
            basis: Matrix::from_vec(n, self.n_features(), data)?,
            explained_variance: self.explained_variance[..n].to_vec(),
            total_variance: self.total_variance,
        })
    }
}

/// `(A − 1·meanᵀ) · M` streamed over the rows of `A`.
fn centered_times<S: RowSource + ?Sized>(source: &S, mean: &[f64], m: &Matrix) -> Result<Matrix> {
    let (rows, cols, l) = (source.nrows(), source.ncols(), m.cols());
    let mut out = Matrix::zeros(rows, l);
    let mut buf = vec![0.0; cols];
    for i in 0..rows {
        source.read_row(i, &mut buf)?;
        let out_row = out.row_mut(i);
        for (c, (&x, &mu)) in buf.iter().zip(mean).enumerate() {
            let v = x - mu;
            if v != 0.0 {
                for (o, &b) in out_row.iter_mut().zip(m.row(c)) {
                    *o += v * b;
                }
            }
        }
    }
    Ok(out)
}

/// `(A − 1·meanᵀ)ᵀ · Q` streamed over the rows of `A`.
fn centered_tr_times<S: RowSource + ?Sized>(source: &S, mean: &[f64], q: &Matrix) -> Result<Matrix> {
    let (rows, cols, l) = (source.nrows(), source.ncols(), q.cols());
    let mut out = Matrix::zeros(cols, l);
    let mut buf = vec![0.0; cols];
    for i in 0..rows {
        source.read_row(i, &mut buf)?;
        let q_row = q.row(i);
        for (c, (&x, &mu)) in buf.iter().zip(mean).enumerate() {
            let v = x - mu;
            if v != 0.0 {
                for (o, &b) in out.row_mut(c).iter_mut().zip(q_row) {
                    *o += v * b;
                }
            }
        }
    }
    Ok(out)
}

/// Fits the leading `n_components` principal components with a seeded
/// randomized truncated SVD of the centered data.
pub fn pca_fit<S: RowSource + ?Sized>(source: &S, n_components: usize, seed: u64) -> Result<PcaModel> {
    let (rows, cols) = (source.nrows(), source.ncols());
    if rows < 2 {
        return Err(arg_err!("PCA needs at least 2 rows, got {rows}"));
    }
    if n_components == 0 || n_components > (rows - 1).min(cols) {
        return Err(arg_err!(
            "n_components must be in 1..={}, got {n_components}",
            (rows - 1).min(cols)
        ));
    }
    let mut mean = vec![0.0; cols];
    let mut buf = vec![0.0; cols];
    for i in 0..rows {
        source.read_row(i, &mut buf)?;
        for (m, x) in mean.iter_mut().zip(&buf) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    let mut sum_sq = 0.0;
    for i in 0..rows {
        source.read_row(i, &mut buf)?;
        sum_sq += buf.iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>();
    }
    if !sum_sq.is_finite() {
        return Err(Error::Numerical("non-finite feature values".into()));
    }
    let total_variance = sum_sq / (rows - 1) as f64;

    let sketch = (n_components + RANDOMIZED_OVERSAMPLING).min(rows.min(cols));
    let mut rng = rng_from_seed(seed);
    let omega = Matrix::from_fn(cols, sketch, |_, _| StandardNormal.sample(&mut rng));
    let mut q = thin_q(&centered_times(source, &mean, &omega)?);
    for _ in 0..RANDOMIZED_POWER_ITERATIONS {
        let z = thin_q(&centered_tr_times(source, &mean, &q)?);
        q = thin_q(&centered_times(source, &mean, &z)?);
    }
    // Bᵀ = A_cᵀ Q; its left singular vectors are the principal directions
    let bt = centered_tr_times(source, &mean, &q)?;
    let svd = jacobi_svd(&bt);
    let mut basis = Matrix::zeros(n_components, cols);
    for k in 0..n_components {
        let row = basis.row_mut(k);
        for (c, v) in row.iter_mut().enumerate() {
            *v = svd.u[(c, k)];
        }
        // deterministic sign: largest-magnitude entry positive
        let pivot = row.iter().fold(0.0f64, |best, &v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let explained_variance =
        svd.singular_values[..n_components].iter().map(|s| s * s / (rows - 1) as f64).collect();
    Ok(PcaModel { mean, basis, explained_variance, total_variance })
}

/// Scores `(x − f̄)·φᵀ`, one row per input row.
pub fn pca_transform<S: RowSource + ?Sized>(model: &PcaModel, features: &S) -> Result<Matrix> {
    if features.ncols() != model.n_features() {
        return Err(Error::Dimension(alloc::format!(
            "model has {} features, input has {}",
            model.n_features(),
            features.ncols()
        )));
    }
    centered_times(features, &model.mean, &model.basis.transpose())
}

/// Features `α·φ + f̄` from scores.
pub fn pca_reconstruct(model: &PcaModel, scores: &Matrix) -> Result<Matrix> {
    if scores.cols() != model.rank() {
        return Err(Error::Dimension(alloc::format!(
            "model has rank {}, scores have {} columns",
            model.rank(),
            scores.cols()
        )));
    }
    let mut out = scores.matmul(&model.basis)?;
    for i in 0..out.rows() {
        for (v, m) in out.row_mut(i).iter_mut().zip(&model.mean) {
            *v += m;
        }
    }
    Ok(out)
}
