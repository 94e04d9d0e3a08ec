//! Small dense linear algebra on row-major `f64` matrices: products,
//! Cholesky with a jitter ladder, triangular solves, Householder QR and a
//! one-sided Jacobi SVD.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: indices.len(), cols: self.cols, data }
    }

    /// First `n` columns.
    pub fn leading_columns(&self, n: usize) -> Self {
        let n = n.min(self.cols);
        Self::from_fn(self.rows, n, |i, j| self[(i, j)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other`.
    pub fn tr_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b_row = other.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factorizes a symmetric matrix; only the lower triangle is read.
    pub fn new(a: &Matrix) -> Option<Self> {
        let n = a.rows;
        assert_eq!(n, a.cols, "Cholesky needs a square matrix");
        let mut l = a.clone();
        let mut row_j = vec![0.0; n];
        for j in 0..n {
            row_j.copy_from_slice(l.row(j));
            let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            row_j[j] = d;
            row_j[j + 1..].iter_mut().for_each(|v| *v = 0.0);
            l.row_mut(j).copy_from_slice(&row_j);
            for i in j + 1..n {
                let row_i = l.row_mut(i);
                row_i[j] = (row_i[j] - dot(&row_i[..j], &row_j[..j])) / d;
            }
        }
        Some(Self { l })
    }

    /// Factorizes `A + jitter·I`, escalating the jitter ×10 from `start` up to
    /// `max` until the factorization succeeds. Returns the jitter used.
    pub fn with_jitter(a: &Matrix, start: f64, max: f64) -> Result<(Self, f64)> {
        if let Some(c) = Self::new(a) {
            return Ok((c, 0.0));
        }
        let mut jitter = start;
        while jitter <= max * (1.0 + 1e-9) {
            let mut shifted = a.clone();
            for i in 0..a.rows {
                shifted[(i, i)] += jitter;
            }
            if let Some(c) = Self::new(&shifted) {
                return Ok((c, jitter));
            }
            jitter *= 10.0;
        }
        Err(Error::Conditioning(format!("Cholesky failed with jitter up to {max:e}")))
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows
    }

    /// `Σ log L_ii` = ½ log det A.
    pub fn half_log_det(&self) -> f64 {
        (0..self.dim()).map(|i| self.l[(i, i)].ln()).sum()
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.l.row(i);
            let s = b[i] - dot(&row[..i], &b[..i]);
            b[i] = s / row[i];
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            b[i] /= self.l[(i, i)];
            let bi = b[i];
            let row = self.l.row(i);
            for k in 0..i {
                b[k] -= row[k] * bi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// Explicit `A⁻¹`.
    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        // L⁻¹ column by column, then A⁻¹ = L⁻ᵀ L⁻¹
        let mut linv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            // forward substitution starting at j (entries above are zero)
            for i in j..n {
                let row = self.l.row(i);
                let s = e[i] - dot(&row[j..i], &e[j..i]);
                e[i] = s / row[i];
            }
            for i in j..n {
                linv[(i, j)] = e[i];
            }
        }
        // A⁻¹ = L⁻ᵀ L⁻¹ accumulated as outer products of the rows of L⁻¹
        let mut inv = Matrix::zeros(n, n);
        for k in 0..n {
            let r = &linv.data[k * n..k * n + k + 1];
            for (i, &ri) in r.iter().enumerate() {
                if ri == 0.0 {
                    continue;
                }
                let row = &mut inv.data[i * n..i * n + i + 1];
                for (o, &rj) in row.iter_mut().zip(r) {
                    *o += ri * rj;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                inv.data[j * n + i] = inv.data[i * n + j];
            }
        }
        inv
    }

    /// Appends one row/column to the factored matrix: `new_col` holds the
    /// covariances with the existing rows and `diag` the new diagonal entry.
    pub fn extend(&mut self, new_col: &[f64], diag: f64) -> Result<()> {
        let n = self.dim();
        assert_eq!(new_col.len(), n);
        let mut v = new_col.to_vec();
        self.solve_lower_in_place(&mut v);
        let d = diag - dot(&v, &v);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Conditioning("rank-one extension lost positive definiteness".into()));
        }
        let mut l = Matrix::zeros(n + 1, n + 1);
        for i in 0..n {
            l.row_mut(i)[..n].copy_from_slice(self.l.row(i));
        }
        l.row_mut(n)[..n].copy_from_slice(&v);
        l[(n, n)] = d.sqrt();
        self.l = l;
        Ok(())
    }
}

/// Thin Householder QR: returns `Q` (`m × min(m, n)`) with orthonormal columns
/// spanning the column space of `a`.
pub fn thin_q(a: &Matrix) -> Matrix {
    let (m, n) = (a.rows, a.cols);
    let k = m.min(n);
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v: Vec<f64> = (j..m).map(|i| r[(i, j)]).collect();
        let alpha = norm(&v);
        if alpha == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vn = norm(&v);
        v.iter_mut().for_each(|x| *x /= vn);
        for c in j..n {
            let s: f64 = (j..m).map(|i| v[i - j] * r[(i, c)]).sum();
            for i in j..m {
                r[(i, c)] -= 2.0 * v[i - j] * s;
            }
        }
        reflectors.push(v);
    }
    // Q = H_0 H_1 … H_{k-1} applied to the first k identity columns
    let mut q = Matrix::zeros(m, k);
    for j in 0..k {
        q[(j, j)] = 1.0;
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for c in 0..k {
            let s: f64 = (j..m).map(|i| v[i - j] * q[(i, c)]).sum();
            if s != 0.0 {
                for i in j..m {
                    q[(i, c)] -= 2.0 * v[i - j] * s;
                }
            }
        }
    }
    q
}

/// Thin SVD `A = U diag(s) Vᵀ` with singular values sorted non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as rows (`k × cols`).
    pub vt: Matrix,
}

/// One-sided Jacobi SVD of a `m × n` matrix.
///
/// Columns of a working copy are rotated pairwise until mutually orthogonal;
/// the column norms are the singular values. The routine operates on the
/// transpose when `m < n`, so the cost per sweep is `O(min(m,n)² · max(m,n))`.
pub fn jacobi_svd(a: &Matrix) -> Svd {
    if a.rows < a.cols {
        let t = jacobi_svd(&a.transpose());
        return Svd { u: t.vt.transpose(), singular_values: t.singular_values, vt: t.u.transpose() };
    }
    let (m, n) = (a.rows, a.cols);
    // work column-major for cache-friendly column rotations
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        e
    }).collect();
    let tol = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                let (lo, hi) = v.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = cols.iter().map(|c| norm(c)).enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut u = Matrix::zeros(m, n);
    let mut vt = Matrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (k, &(j, s)) in order.iter().enumerate() {
        singular_values.push(s);
        for i in 0..m {
            u[(i, k)] = if s > 0.0 { cols[j][i] / s } else { 0.0 };
        }
        vt.row_mut(k).copy_from_slice(&v[j]);
    }
    Svd { u, singular_values, vt }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>() - 0.5)
    }

    fn spd(n: usize, seed: u64) -> Matrix {
        let a = random(n, n, seed);
        let mut s = a.tr_matmul(&a).unwrap();
        for i in 0..n {
            s[(i, i)] += 0.1;
        }
        s
    }

    #[test]
    fn cholesky_reconstructs_and_solves() {
        let a = spd(12, 1);
        let c = Cholesky::new(&a).unwrap();
        let l = c.factor();
        let llt = l.matmul(&l.transpose()).unwrap();
        assert!(llt.max_abs_diff(&a) < 1e-12);
        let b: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let x = c.solve(&b);
        let ax: Vec<f64> = (0..12).map(|i| dot(a.row(i), &x)).collect();
        for (p, q) in ax.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9);
        }
        let inv = c.inverse();
        assert!(inv.matmul(&a).unwrap().max_abs_diff(&Matrix::identity(12)) < 1e-9);
        let nalg = nalgebra::DMatrix::from_row_slice(12, 12, a.as_slice());
        let det = nalg.determinant();
        assert!((2.0 * c.half_log_det() - det.ln()).abs() < 1e-9);
    }

    #[test]
    fn cholesky_jitter_ladder() {
        // rank-one PSD matrix needs jitter
        let v = [1.0, 2.0, 3.0];
        let a = Matrix::from_fn(3, 3, |i, j| v[i] * v[j]);
        assert!(Cholesky::new(&a).is_none());
        let (_, jitter) = Cholesky::with_jitter(&a, 1e-10, 1e-4).unwrap();
        assert!((1e-10..=1e-4).contains(&jitter));
        let neg = Matrix::from_fn(2, 2, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(matches!(Cholesky::with_jitter(&neg, 1e-10, 1e-4), Err(Error::Conditioning(_))));
    }

    #[test]
    fn cholesky_extension_matches_full_factorization() {
        let a = spd(8, 4);
        let sub = Matrix::from_fn(7, 7, |i, j| a[(i, j)]);
        let mut c = Cholesky::new(&sub).unwrap();
        let col: Vec<f64> = (0..7).map(|i| a[(7, i)]).collect();
        c.extend(&col, a[(7, 7)]).unwrap();
        let full = Cholesky::new(&a).unwrap();
        assert!(c.factor().max_abs_diff(full.factor()) < 1e-12);
    }

    #[test]
    fn thin_q_is_orthonormal_and_spans() {
        for (m, n) in [(10, 4), (6, 6), (4, 7)] {
            let a = random(m, n, 9);
            let q = thin_q(&a);
            assert_eq!(q.cols(), m.min(n));
            let qtq = q.tr_matmul(&q).unwrap();
            assert!(qtq.max_abs_diff(&Matrix::identity(m.min(n))) < 1e-12);
            // projection of A onto span(Q) reproduces A when rank(A) = min(m, n) ≤ cols(Q)
            if n <= m {
                let proj = q.matmul(&q.tr_matmul(&a).unwrap()).unwrap();
                assert!(proj.max_abs_diff(&a) < 1e-12);
            }
        }
    }

    #[test]
    fn thin_q_handles_rank_deficiency() {
        let mut a = random(8, 3, 2);
        for i in 0..8 {
            a[(i, 2)] = a[(i, 0)] + a[(i, 1)];
        }
        let q = thin_q(&a);
        assert!(q.tr_matmul(&q).unwrap().max_abs_diff(&Matrix::identity(3)) < 1e-10);
    }

    #[test]
    fn jacobi_svd_matches_nalgebra() {
        for (m, n) in [(9, 5), (5, 9), (20, 20)] {
            let a = random(m, n, 21);
            let svd = jacobi_svd(&a);
            let reference = nalgebra::DMatrix::from_row_slice(m, n, a.as_slice()).svd(false, false);
            let mut s_ref: Vec<f64> = reference.singular_values.iter().copied().collect();
            s_ref.sort_by(|a, b| b.total_cmp(a));
            for (x, y) in svd.singular_values.iter().zip(&s_ref) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
            // reconstruction
            let k = svd.singular_values.len();
            let us = Matrix::from_fn(svd.u.rows(), k, |i, j| svd.u[(i, j)] * svd.singular_values[j]);
            let rec = us.matmul(&svd.vt).unwrap();
            assert!(rec.max_abs_diff(&a) < 1e-12);
            for w in svd.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn products_and_dimension_errors() {
        let a = random(3, 4, 1);
        let b = random(4, 2, 2);
        let ab = a.matmul(&b).unwrap();
        let atb = a.transpose().tr_matmul(&b).unwrap();
        assert!(ab.max_abs_diff(&atb) < 1e-15);
        assert!(matches!(a.matmul(&a), Err(Error::Dimension(_))));
        assert!(matches!(a.tr_matmul(&b), Err(Error::Dimension(_))));
        assert!(Matrix::from_vec(2, 2, vec![1.0]).is_err());
    }
}
