//! Effective elastic stiffness of periodic solid/void cells.
//!
//! The periodic strain fluctuation is found with a Galerkin-FFT scheme: the
//! unknown is a compatible strain field `e` and the system is
//! `G C G e = -G C ε̄`, where `C` is the pixelwise stiffness (exactly zero on
//! void pixels) and `G` the orthogonal projection onto compatible fields.
//! Compatibility is that of the rotated finite-difference grid: displacements
//! sit on pixel corners and each pixel strain averages the two adjacent
//! differences, which gives the modified frequency vector
//! `q(ξ) = (sin(ξ₁/2) cos(ξ₂/2), cos(ξ₁/2) sin(ξ₂/2))` per Fourier mode.
//! `G` annihilates the zero mode (zero-mean fluctuation) and the `(π, π)`
//! checkerboard, and the singular but consistent system is solved with MINRES.
//!
//! Kinematics are plane strain. Strains and stresses use Mandel notation
//! `[e₁₁, e₂₂, √2 e₁₂]` internally so the Euclidean inner product matches the
//! tensor contraction. Direction 1 runs along the row index (`y`) of the cell
//! grid and direction 2 along the column index (`x`).

pub mod minres;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{arg_err, Error, Result};
use crate::fft::Fft2;
use crate::geometry::{BinaryGrid, UnitCell, SOLID};
pub use minres::{minres, MinresOutcome};

/// Isotropic linear elastic solid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub youngs_modulus: f64,
    pub poissons_ratio: f64,
}

impl Default for Material {
    fn default() -> Self {
        Self { youngs_modulus: 1.0, poissons_ratio: 0.3 }
    }
}

impl Material {
    pub fn new(youngs_modulus: f64, poissons_ratio: f64) -> Result<Self> {
        if !(youngs_modulus >= 0.0) || !youngs_modulus.is_finite() {
            return Err(arg_err!("Young's modulus must be finite and non-negative, got {youngs_modulus}"));
        }
        if !(poissons_ratio > -1.0 && poissons_ratio < 0.5) {
            return Err(arg_err!("Poisson's ratio must lie in (-1, 0.5), got {poissons_ratio}"));
        }
        Ok(Self { youngs_modulus, poissons_ratio })
    }

    pub fn lame_lambda(&self) -> f64 {
        let (e, nu) = (self.youngs_modulus, self.poissons_ratio);
        e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    }

    pub fn lame_mu(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poissons_ratio))
    }
}

/// Plane-strain isotropic stiffness; minor and major symmetries are implied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stiffness {
    pub c1111: f64,
    pub c2222: f64,
    pub c1122: f64,
    pub c1212: f64,
}

impl Stiffness {
    /// Component `C_ijkl` for indices in `{1, 2}`.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        match (i == j, k == l) {
            (true, true) => match (i, k) {
                (1, 1) => self.c1111,
                (2, 2) => self.c2222,
                _ => self.c1122,
            },
            (false, false) => self.c1212,
            _ => 0.0,
        }
    }

    /// Reduced 3×3 matrix in Voigt order `[11, 22, 12]`.
    pub fn voigt(&self) -> [[f64; 3]; 3] {
        [
            [self.c1111, self.c1122, 0.0],
            [self.c1122, self.c2222, 0.0],
            [0.0, 0.0, self.c1212],
        ]
    }

    fn mandel(&self) -> [f64; 4] {
        // a, l on the normal block; 2μ on the shear diagonal
        [self.c1111, self.c1122, self.c2222, 2.0 * self.c1212]
    }
}

pub fn plane_strain_stiffness(material: &Material) -> Stiffness {
    let lambda = material.lame_lambda();
    let mu = material.lame_mu();
    Stiffness { c1111: lambda + 2.0 * mu, c2222: lambda + 2.0 * mu, c1122: lambda, c1212: mu }
}

/// Symmetric 2×2 tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymTensor2 {
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
}

impl SymTensor2 {
    pub fn new(c11: f64, c22: f64, c12: f64) -> Self {
        Self { s11: c11, s22: c22, s12: c12 }
    }

    fn to_mandel(self) -> [f64; 3] {
        [self.s11, self.s22, SQRT_2 * self.s12]
    }

    fn from_mandel(m: [f64; 3]) -> Self {
        Self { s11: m[0], s22: m[1], s12: m[2] / SQRT_2 }
    }
}

/// Independent strain components available for perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrainComponent {
    E11,
    E22,
    E12,
}

/// Macroscopic strain perturbation: one component set to `beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadCase {
    pub component: StrainComponent,
    pub beta: f64,
}

impl LoadCase {
    pub fn new(component: StrainComponent, beta: f64) -> Self {
        Self { component, beta }
    }

    pub fn macro_strain(&self) -> SymTensor2 {
        match self.component {
            StrainComponent::E11 => SymTensor2::new(self.beta, 0.0, 0.0),
            StrainComponent::E22 => SymTensor2::new(0.0, self.beta, 0.0),
            StrainComponent::E12 => SymTensor2::new(0.0, 0.0, self.beta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub average_stress: SymTensor2,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StiffnessResult {
    pub c11: f64,
    pub normalized_c11: f64,
}

pub const DEFAULT_BETA: f64 = 1e-2;
pub const DEFAULT_TOL: f64 = 1e-8;

/// `100·sqrt(pixels)` iterations, capped at 20 000.
pub fn default_max_iter(pixels: usize) -> usize {
    ((100.0 * (pixels as f64).sqrt()) as usize).clamp(1, 20_000)
}

/// Reusable solver state for one grid size: FFT plan, projection table and
/// work buffers.
#[derive(Clone, Debug)]
pub struct Homogenizer {
    width: usize,
    height: usize,
    fft: Fft2,
    /// Per-mode projection `[g11, g12, g13, g22, g23, g33]`.
    projection: Vec<[f64; 6]>,
    /// Index of the mode `-k` for each `k`.
    mirror: Vec<usize>,
    spec_a: Vec<Complex64>,
    spec_b: Vec<Complex64>,
}

impl Homogenizer {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        let mut projection = vec![[0.0; 6]; n];
        let mut mirror = vec![0; n];
        for ky in 0..height {
            let xi1 = 2.0 * PI * ky as f64 / height as f64;
            for kx in 0..width {
                let xi2 = 2.0 * PI * kx as f64 / width as f64;
                let k = ky * width + kx;
                mirror[k] = ((height - ky) % height) * width + (width - kx) % width;
                let q1 = (0.5 * xi1).sin() * (0.5 * xi2).cos();
                let q2 = (0.5 * xi1).cos() * (0.5 * xi2).sin();
                projection[k] = compatible_projection(q1, q2);
            }
        }
        Self {
            width,
            height,
            fft: Fft2::new(width, height),
            projection,
            mirror,
            spec_a: vec![Complex64::new(0.0, 0.0); n],
            spec_b: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn pixels(&self) -> usize {
        self.width * self.height
    }

    /// `out = G(field)` for a Mandel field stored component-major.
    fn project(&mut self, field: &[f64], out: &mut [f64]) {
        let n = self.pixels();
        let (f11, rest) = field.split_at(n);
        let (f22, f12) = rest.split_at(n);
        for i in 0..n {
            self.spec_a[i] = Complex64::new(f11[i], f22[i]);
            self.spec_b[i] = Complex64::new(f12[i], 0.0);
        }
        self.fft.forward(&mut self.spec_a);
        self.fft.forward(&mut self.spec_b);
        // unpack the two real spectra from spec_a, project, and repack; each
        // (k, -k) pair is handled once
        for k in 0..n {
            let mk = self.mirror[k];
            if mk < k {
                continue;
            }
            let za = self.spec_a[k];
            let zam = self.spec_a[mk];
            let s11 = (za + zam.conj()) * 0.5;
            let s22 = (za - zam.conj()) * Complex64::new(0.0, -0.5);
            let s12 = self.spec_b[k];
            let g = &self.projection[k];
            let e11 = s11 * g[0] + s22 * g[1] + s12 * g[2];
            let e22 = s11 * g[1] + s22 * g[3] + s12 * g[4];
            let e12 = s11 * g[2] + s22 * g[4] + s12 * g[5];
            let i = Complex64::new(0.0, 1.0);
            self.spec_a[k] = e11 + i * e22;
            self.spec_b[k] = e12;
            if mk != k {
                // the projection is even in k and the outputs are Hermitian
                self.spec_a[mk] = e11.conj() + i * e22.conj();
                self.spec_b[mk] = e12.conj();
            }
        }
        self.fft.inverse_normalized(&mut self.spec_a);
        self.fft.inverse_normalized(&mut self.spec_b);
        let (o11, rest) = out.split_at_mut(n);
        let (o22, o12) = rest.split_at_mut(n);
        for i in 0..n {
            o11[i] = self.spec_a[i].re;
            o22[i] = self.spec_a[i].im;
            o12[i] = self.spec_b[i].re;
        }
    }

    /// Solves the cell problem for one macroscopic load case.
    pub fn solve(
        &mut self,
        cell: &UnitCell,
        material: &Material,
        load: &LoadCase,
        tol: f64,
        max_iter: usize,
    ) -> Result<SolveReport> {
        if (cell.width(), cell.height()) != (self.width, self.height) {
            return Err(Error::Dimension(format!(
                "solver built for {}x{}, cell is {}x{}",
                self.width,
                self.height,
                cell.width(),
                cell.height()
            )));
        }
        if !(tol > 0.0) {
            return Err(arg_err!("tolerance must be positive, got {tol}"));
        }
        if !load.beta.is_finite() {
            return Err(Error::Numerical("non-finite strain perturbation".into()));
        }
        let n = self.pixels();
        let solid: Vec<bool> = cell.cells().iter().map(|&v| v == SOLID).collect();
        let [a, l, b, s] = plane_strain_stiffness(material).mandel();
        let apply_c = |e: &[f64], out: &mut [f64]| {
            for i in 0..n {
                if solid[i] {
                    let (e11, e22, e12) = (e[i], e[n + i], e[2 * n + i]);
                    out[i] = a * e11 + l * e22;
                    out[n + i] = l * e11 + b * e22;
                    out[2 * n + i] = s * e12;
                } else {
                    out[i] = 0.0;
                    out[n + i] = 0.0;
                    out[2 * n + i] = 0.0;
                }
            }
        };

        let macro_strain = load.macro_strain().to_mandel();
        let mut stress = vec![0.0; 3 * n];
        let mut uniform = vec![0.0; 3 * n];
        for (c, &m) in macro_strain.iter().enumerate() {
            uniform[c * n..(c + 1) * n].iter_mut().for_each(|v| *v = m);
        }
        apply_c(&uniform, &mut stress);
        let mut rhs = vec![0.0; 3 * n];
        self.project(&stress, &mut rhs);
        rhs.iter_mut().for_each(|v| *v = -*v);

        let mut fluctuation = vec![0.0; 3 * n];
        let mut scratch = vec![0.0; 3 * n];
        let outcome = minres(
            |v, out| {
                apply_c(v, &mut scratch);
                self.project(&scratch, out);
            },
            &rhs,
            &mut fluctuation,
            tol,
            max_iter,
        );
        if fluctuation.iter().any(|v| !v.is_finite()) || !outcome.relative_residual.is_finite() {
            return Err(Error::Numerical("non-finite strain field in homogenization".into()));
        }

        for (u, f) in uniform.iter_mut().zip(&fluctuation) {
            *u += f;
        }
        apply_c(&uniform, &mut stress);
        let mut average = [0.0; 3];
        for (c, avg) in average.iter_mut().enumerate() {
            *avg = stress[c * n..(c + 1) * n].iter().sum::<f64>() / n as f64;
        }
        Ok(SolveReport {
            average_stress: SymTensor2::from_mandel(average),
            iterations: outcome.iterations,
            relative_residual: outcome.relative_residual,
            converged: outcome.converged,
        })
    }

    /// `C11 = σ̄11 / β` from the single perturbation `ε̄11 = β`.
    pub fn effective_c11(
        &mut self,
        cell: &UnitCell,
        material: &Material,
        beta: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<(StiffnessResult, SolveReport)> {
        if beta == 0.0 {
            return Err(arg_err!("strain perturbation must be non-zero"));
        }
        let report = self.solve(cell, material, &LoadCase::new(StrainComponent::E11, beta), tol, max_iter)?;
        let c11 = report.average_stress.s11 / beta;
        let normalized_c11 =
            if material.youngs_modulus > 0.0 { c11 / material.youngs_modulus } else { 0.0 };
        Ok((StiffnessResult { c11, normalized_c11 }, report))
    }
}

/// `B (BᵀB)⁻¹ Bᵀ` for the Mandel symmetric-gradient map `B(q)`; zero where
/// `q` vanishes.
fn compatible_projection(q1: f64, q2: f64) -> [f64; 6] {
    let qq = q1 * q1 + q2 * q2;
    if qq < 1e-24 {
        return [0.0; 6];
    }
    // BᵀB = [[q1² + q2²/2, q1q2/2], [q1q2/2, q2² + q1²/2]]
    let m11 = q1 * q1 + 0.5 * q2 * q2;
    let m12 = 0.5 * q1 * q2;
    let m22 = q2 * q2 + 0.5 * q1 * q1;
    let det = m11 * m22 - m12 * m12;
    let (i11, i12, i22) = (m22 / det, -m12 / det, m11 / det);
    let r = 1.0 / SQRT_2;
    // rows of B
    let b = [[q1, 0.0], [0.0, q2], [q2 * r, q1 * r]];
    let entry = |p: usize, s: usize| {
        let (bp, bs) = (b[p], b[s]);
        bp[0] * (i11 * bs[0] + i12 * bs[1]) + bp[1] * (i12 * bs[0] + i22 * bs[1])
    };
    [entry(0, 0), entry(0, 1), entry(0, 2), entry(1, 1), entry(1, 2), entry(2, 2)]
}

/// One-shot solve for a single cell.
pub fn solve_cell(
    cell: &UnitCell,
    material: &Material,
    load: &LoadCase,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    Homogenizer::new(cell.width(), cell.height()).solve(cell, material, load, tol, max_iter)
}

/// `C11` with the default perturbation and iteration cap.
pub fn effective_c11(cell: &UnitCell, material: &Material, tol: f64) -> Result<StiffnessResult> {
    let max_iter = default_max_iter(cell.len());
    Homogenizer::new(cell.width(), cell.height())
        .effective_c11(cell, material, DEFAULT_BETA, tol, max_iter)
        .map(|(r, _)| r)
}

/// Per-cell outcome of a labeling batch.
#[derive(Clone, Debug, PartialEq)]
pub struct CellLabel {
    pub index: usize,
    pub normalized_c11: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabelBatch {
    /// Every successfully solved cell, in input order.
    pub labels: Vec<CellLabel>,
    /// Indices whose label passed the filter, ascending.
    pub kept: Vec<usize>,
    /// Indices removed by the filter, ascending.
    pub dropped: Vec<usize>,
    /// Solver failures; these cells are neither kept nor dropped.
    pub failures: Vec<(usize, Error)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelConfig {
    pub tol: f64,
    pub beta: f64,
    pub filter_threshold: f64,
    /// `None` selects [`default_max_iter`].
    pub max_iter: Option<usize>,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, beta: DEFAULT_BETA, filter_threshold: 0.01, max_iter: None }
    }
}

/// Labels one cell with its normalized `C11`, reusing `solver` when the grid
/// size matches.
pub fn label_cell(
    solver: &mut Option<Homogenizer>,
    index: usize,
    cell: &UnitCell,
    material: &Material,
    config: &LabelConfig,
) -> Result<CellLabel> {
    let fits = solver.as_ref().is_some_and(|s| (s.width, s.height) == (cell.width(), cell.height()));
    if !fits {
        *solver = Some(Homogenizer::new(cell.width(), cell.height()));
    }
    let h = solver.as_mut().expect("solver initialized above");
    let max_iter = config.max_iter.unwrap_or_else(|| default_max_iter(cell.len()));
    let (result, report) = h.effective_c11(cell, material, config.beta, config.tol, max_iter)?;
    Ok(CellLabel {
        index,
        normalized_c11: result.normalized_c11,
        converged: report.converged,
        iterations: report.iterations,
        residual: report.relative_residual,
    })
}

/// Splits solved labels into kept/dropped by `normalized_c11 < threshold`.
pub fn collect_labels(results: Vec<Result<CellLabel>>, filter_threshold: f64) -> LabelBatch {
    let mut batch = LabelBatch::default();
    for (index, result) in results.into_iter().enumerate() {
        match result {
            Ok(label) => {
                if label.normalized_c11 < filter_threshold {
                    batch.dropped.push(index);
                } else {
                    batch.kept.push(index);
                }
                batch.labels.push(label);
            }
            Err(e) => batch.failures.push((index, e)),
        }
    }
    batch
}

/// Labels a batch sequentially; failures are recorded per index.
pub fn label_dataset(
    cells: &[UnitCell],
    material: &Material,
    config: &LabelConfig,
) -> Result<LabelBatch> {
    if !(config.filter_threshold >= 0.0) {
        return Err(arg_err!("filter threshold must be non-negative"));
    }
    let mut solver = None;
    let results = cells
        .iter()
        .enumerate()
        .map(|(i, c)| label_cell(&mut solver, i, c, material, config))
        .collect();
    Ok(collect_labels(results, config.filter_threshold))
}
