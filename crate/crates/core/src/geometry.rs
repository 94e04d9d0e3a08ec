//! Periodic binary unit cells: generation, validation and local-state masks.
//!
//! Cells are stored row-major with `cells[y * width + x]`; `1` is solid and
//! `0` is void. Every consumer treats a cell as periodic in both directions.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{arg_err, Error, Result};
use crate::fft::{signed_frequency, Fft2};
use crate::seed::{derive_seed_index, rng_from_seed};

/// Local-state label of the void phase.
pub const VOID: u8 = 0;
/// Local-state label of the solid phase.
pub const SOLID: u8 = 1;
/// Local-state label of the solid/void interface (void pixels touching solid).
pub const INTERFACE: u8 = 2;

/// Shared read access for binary pixel grids.
pub trait BinaryGrid {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn cells(&self) -> &[u8];

    fn len(&self) -> usize {
        self.width() * self.height()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn count_ones(&self) -> usize {
        self.cells().iter().filter(|&&v| v == 1).count()
    }
}

/// Fraction of pixels set to 1.
pub fn volume_fraction<G: BinaryGrid + ?Sized>(grid: &G) -> f64 {
    grid.count_ones() as f64 / grid.len() as f64
}

fn check_binary(width: usize, height: usize, cells: &[u8]) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(arg_err!("grid dimensions must be positive, got {width}x{height}"));
    }
    if cells.len() != width * height {
        return Err(Error::Dimension(format!(
            "expected {} pixels for {width}x{height}, got {}",
            width * height,
            cells.len()
        )));
    }
    if let Some(pos) = cells.iter().position(|&v| v > 1) {
        return Err(arg_err!("pixel {pos} has non-binary value {}", cells[pos]));
    }
    Ok(())
}

/// Periodic binary solid/void pixel grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnitCell {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl UnitCell {
    pub fn new(width: usize, height: usize, cells: Vec<u8>) -> Result<Self> {
        check_binary(width, height, &cells)?;
        Ok(Self { width, height, cells })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a cell from rows given top to bottom.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let cells = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(width, height, cells)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.cells[y * self.width + x]
    }

    /// Value at a periodic position.
    #[inline]
    pub fn get_wrapped(&self, x: isize, y: isize) -> u8 {
        let xi = x.rem_euclid(self.width as isize) as usize;
        let yi = y.rem_euclid(self.height as isize) as usize;
        self.get(xi, yi)
    }

    pub fn into_cells(self) -> Vec<u8> {
        self.cells
    }

    pub fn mask(&self, phase: u8) -> PhaseMask {
        let cells = match phase {
            SOLID => self.cells.clone(),
            VOID => self.cells.iter().map(|&v| 1 - v).collect(),
            INTERFACE => return extract_interface(self),
            _ => panic!("unknown local state {phase}"),
        };
        PhaseMask { width: self.width, height: self.height, cells, phase_id: phase }
    }

    pub fn solid_mask(&self) -> PhaseMask {
        self.mask(SOLID)
    }

    /// Cyclic shift: the pixel at `(x, y)` moves to `(x + dx, y + dy)`.
    pub fn shifted(&self, dx: isize, dy: isize) -> Self {
        let mut cells = vec![0; self.cells.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                cells[y * self.width + x] = self.get_wrapped(x as isize - dx, y as isize - dy);
            }
        }
        Self { width: self.width, height: self.height, cells }
    }

    /// Mirror image under `x -> width - 1 - x`.
    pub fn flipped_horizontal(&self) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for row in self.cells.chunks_exact(self.width) {
            cells.extend(row.iter().rev());
        }
        Self { width: self.width, height: self.height, cells }
    }

    /// Mirror image under `y -> height - 1 - y`.
    pub fn flipped_vertical(&self) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for row in self.cells.chunks_exact(self.width).rev() {
            cells.extend_from_slice(row);
        }
        Self { width: self.width, height: self.height, cells }
    }

    /// Pixel replication by an integer factor in both directions.
    pub fn upsampled(&self, factor: usize) -> Self {
        assert!(factor > 0);
        let (w, h) = (self.width * factor, self.height * factor);
        let mut cells = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                cells.push(self.get(x / factor, y / factor));
            }
        }
        Self { width: w, height: h, cells }
    }
}

impl BinaryGrid for UnitCell {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn cells(&self) -> &[u8] {
        &self.cells
    }
}

/// Indicator grid of one local state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseMask {
    width: usize,
    height: usize,
    cells: Vec<u8>,
    phase_id: u8,
}

impl PhaseMask {
    pub fn new(width: usize, height: usize, cells: Vec<u8>, phase_id: u8) -> Result<Self> {
        check_binary(width, height, &cells)?;
        Ok(Self { width, height, cells, phase_id })
    }

    pub fn phase_id(&self) -> u8 {
        self.phase_id
    }
}

impl BinaryGrid for PhaseMask {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn cells(&self) -> &[u8] {
        &self.cells
    }
}

/// Real scalar per pixel, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite field value".into()));
        }
        Ok(Self { width, height, values })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        let var = self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64;
        var.sqrt()
    }
}

/// Periodic Gaussian random field with a squared-exponential covariance.
///
/// `correlation_length` is the distance (pixels) at which the covariance has
/// decayed to `e⁻²`, i.e. `C(r) = exp(-2 r² / ℓ²)`. White noise is filtered in Fourier space, so the coefficients are
/// independent complex Gaussians with Hermitian symmetry. The zero mode is
/// removed and the spectrum normalized so the expected pixel variance is 1.
pub fn sample_gaussian_field(
    seed: u64,
    width: usize,
    height: usize,
    correlation_length: f64,
) -> Result<RealField> {
    if width < 2 || height < 2 {
        return Err(arg_err!("field dimensions must be at least 2x2, got {width}x{height}"));
    }
    if !(correlation_length > 0.0) || !correlation_length.is_finite() {
        return Err(arg_err!("correlation length must be positive, got {correlation_length}"));
    }
    let n = width * height;
    let mut rng = rng_from_seed(seed);
    let mut data: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();

    // covariance exp(-r²/2L²) with L = ℓ/2  <->  spectral density ∝ exp(-2π²L²|f|²)
    let length = 0.5 * correlation_length;
    let mut spectrum = vec![0.0; n];
    let mut total = 0.0;
    for ky in 0..height {
        let fy = signed_frequency(ky, height) as f64 / height as f64;
        for kx in 0..width {
            if kx == 0 && ky == 0 {
                continue;
            }
            let fx = signed_frequency(kx, width) as f64 / width as f64;
            let s = (-2.0 * PI * PI * length * length * (fx * fx + fy * fy))
                .exp();
            spectrum[ky * width + kx] = s;
            total += s;
        }
    }
    if total <= 0.0 {
        return Err(Error::Numerical("correlation length too large for grid".into()));
    }
    // E[field²] = (1/n) Σ S_k for unit white noise
    let norm = n as f64 / total;
    let mut plan = Fft2::new(width, height);
    plan.forward(&mut data);
    for (v, s) in data.iter_mut().zip(&spectrum) {
        *v *= (s * norm).sqrt();
    }
    plan.inverse_normalized(&mut data);
    RealField::new(width, height, data.iter().map(|c| c.re).collect())
}

/// Pixels with `value >= threshold` become solid.
pub fn binarize(field: &RealField, threshold: f64) -> UnitCell {
    let cells = field.values.iter().map(|&v| u8::from(v >= threshold)).collect();
    UnitCell { width: field.width, height: field.height, cells }
}

/// Threshold that makes `round(density · n)` pixels solid (at least one).
pub fn density_threshold(field: &RealField, density: f64) -> f64 {
    let mut sorted = field.values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = ((density * sorted.len() as f64).round() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Boundary presence plus (optionally) periodic 4-connectivity of the solid.
pub fn boundary_connectivity_ok(
    cell: &UnitCell,
    min_boundary_fraction: f64,
    require_connected: bool,
) -> bool {
    let (w, h) = (cell.width, cell.height);
    let row_fraction = |y: usize| (0..w).filter(|&x| cell.get(x, y) == SOLID).count() as f64 / w as f64;
    let col_fraction = |x: usize| (0..h).filter(|&y| cell.get(x, y) == SOLID).count() as f64 / h as f64;
    let lines = [row_fraction(0), row_fraction(h - 1), col_fraction(0), col_fraction(w - 1)];
    if lines.iter().any(|&f| f < min_boundary_fraction) {
        return false;
    }
    !require_connected || solid_is_connected(cell)
}

/// True when the solid pixels form exactly one 4-connected periodic component.
pub fn solid_is_connected(cell: &UnitCell) -> bool {
    let total = cell.count_ones();
    let Some(start) = cell.cells.iter().position(|&v| v == SOLID) else {
        return false;
    };
    let (w, h) = (cell.width, cell.height);
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    let mut reached = 0;
    while let Some(i) = queue.pop_front() {
        reached += 1;
        let (x, y) = (i % w, i / w);
        let neighbours = [
            y * w + (x + 1) % w,
            y * w + (x + w - 1) % w,
            ((y + 1) % h) * w + x,
            ((y + h - 1) % h) * w + x,
        ];
        for j in neighbours {
            if !seen[j] && cell.cells[j] == SOLID {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    reached == total
}

/// Tiles `tile` with its horizontal, vertical and double mirror images into a
/// `2w × 2h` cell that is symmetric about both mid-axes.
pub fn mirror_periodic(tile: &UnitCell) -> UnitCell {
    let (w, h) = (tile.width, tile.height);
    let (ow, oh) = (2 * w, 2 * h);
    let mut cells = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        let ty = if y < h { y } else { oh - 1 - y };
        for x in 0..ow {
            let tx = if x < w { x } else { ow - 1 - x };
            cells.push(tile.get(tx, ty));
        }
    }
    UnitCell { width: ow, height: oh, cells }
}

/// Knobs for [`generate_dataset`].
#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub tile_width: usize,
    pub tile_height: usize,
    pub correlation_length: f64,
    /// Accepted relative densities (inclusive).
    pub density_band: (f64, f64),
    pub min_boundary_fraction: f64,
    pub require_connected: bool,
    /// Minimum acceptance rate before generation is declared stalled.
    pub acceptance_floor: f64,
    /// Trials attempted before the acceptance floor is enforced.
    pub min_trials: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            tile_width: 48,
            tile_height: 48,
            correlation_length: 8.0,
            density_band: (0.30, 0.68),
            min_boundary_fraction: 0.1,
            require_connected: true,
            acceptance_floor: 0.01,
            min_trials: 2000,
        }
    }
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.density_band;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(arg_err!("invalid density band [{lo}, {hi}]"));
        }
        if !(0.0..=1.0).contains(&self.min_boundary_fraction) {
            return Err(arg_err!("min boundary fraction {} outside [0, 1]", self.min_boundary_fraction));
        }
        if self.tile_width < 2 || self.tile_height < 2 {
            return Err(arg_err!("tile must be at least 2x2"));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!(
            "tile {}x{}, correlation length {}, density band [{}, {}], min boundary fraction {}, connected {}",
            self.tile_width,
            self.tile_height,
            self.correlation_length,
            self.density_band.0,
            self.density_band.1,
            self.min_boundary_fraction,
            self.require_connected
        )
    }
}

/// One rejection-sampling trial; `None` when the candidate is rejected.
pub fn generate_candidate(trial_seed: u64, config: &GenConfig) -> Result<Option<UnitCell>> {
    let field = sample_gaussian_field(
        trial_seed,
        config.tile_width,
        config.tile_height,
        config.correlation_length,
    )?;
    // the threshold law uses its own stream so the field stays a pure function of the seed
    let mut rng = rng_from_seed(trial_seed ^ 0x5bd1_e995_u64.rotate_left(17));
    let (lo, hi) = config.density_band;
    let density = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let tile = binarize(&field, density_threshold(&field, density));
    let cell = mirror_periodic(&tile);
    let vf = volume_fraction(&cell);
    if vf < lo || vf > hi {
        return Ok(None);
    }
    if !boundary_connectivity_ok(&cell, config.min_boundary_fraction, config.require_connected) {
        return Ok(None);
    }
    Ok(Some(cell))
}

/// Rejection-samples `count` mirrored unit cells. Trial `t` is seeded with
/// `derive_seed_index(seed, t)`, so the output depends only on the arguments.
pub fn generate_dataset(count: usize, seed: u64, config: &GenConfig) -> Result<Vec<UnitCell>> {
    if count == 0 {
        return Err(arg_err!("count must be at least 1"));
    }
    config.validate()?;
    let mut accepted = Vec::with_capacity(count);
    let mut trials = 0usize;
    while accepted.len() < count {
        if let Some(cell) = generate_candidate(derive_seed_index(seed, trials as u64), config)? {
            accepted.push(cell);
        }
        trials += 1;
        if trials >= config.min_trials
            && (accepted.len() as f64) < config.acceptance_floor * trials as f64
        {
            return Err(Error::GenerationStall(format!(
                "accepted {} of {trials} trials (floor {}) with {}",
                accepted.len(),
                config.acceptance_floor,
                config.describe()
            )));
        }
    }
    Ok(accepted)
}

/// Void pixels whose periodic 5-point stencil contains solid.
pub fn extract_interface(cell: &UnitCell) -> PhaseMask {
    let (w, h) = (cell.width, cell.height);
    let mut cells = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            if cell.get(x, y) != VOID {
                continue;
            }
            let (xi, yi) = (x as isize, y as isize);
            let conv = cell.get_wrapped(xi + 1, yi)
                + cell.get_wrapped(xi - 1, yi)
                + cell.get_wrapped(xi, yi + 1)
                + cell.get_wrapped(xi, yi - 1);
            cells[y * w + x] = u8::from(conv > 0);
        }
    }
    PhaseMask { width: w, height: h, cells, phase_id: INTERFACE }
}

/// Dataset diversity summary.
#[derive(Clone, Debug, PartialEq)]
pub struct DiversityReport {
    /// Mean Euclidean distance between flattened binary images.
    pub mean_pairwise_distance: f64,
    /// `mean_pairwise_distance / sqrt(width·height)`.
    pub normalized_score: f64,
    /// Coefficient of variation of the k-means cluster sizes.
    pub kmeans_cluster_size_cv: f64,
    pub k: usize,
    pub pairs_evaluated: usize,
}

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Mean pairwise distance (all pairs, or `max_pairs` uniformly drawn ones)
/// and the spread of k-means cluster sizes.
pub fn diversity_stats(
    dataset: &[UnitCell],
    k: usize,
    seed: u64,
    max_pairs: usize,
) -> Result<DiversityReport> {
    let n = dataset.len();
    if n < 2 {
        return Err(arg_err!("diversity needs at least 2 cells, got {n}"));
    }
    if k == 0 || k > n {
        return Err(arg_err!("k = {k} must lie in 1..={n}"));
    }
    let pixels = dataset[0].len();
    if dataset.iter().any(|c| c.len() != pixels) {
        return Err(Error::Dimension("cells differ in size".into()));
    }
    let mut rng = rng_from_seed(seed);
    let total_pairs = n * (n - 1) / 2;
    let (sum, pairs) = if total_pairs <= max_pairs.max(1) {
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                sum += (hamming(&dataset[i].cells, &dataset[j].cells) as f64).sqrt();
            }
        }
        (sum, total_pairs)
    } else {
        let mut sum = 0.0;
        for _ in 0..max_pairs {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            sum += (hamming(&dataset[i].cells, &dataset[j].cells) as f64).sqrt();
        }
        (sum, max_pairs)
    };
    let mean = sum / pairs as f64;
    let sizes = kmeans_cluster_sizes(dataset, k, &mut rng, 100);
    let size_mean = sizes.iter().sum::<usize>() as f64 / k as f64;
    let size_var = sizes.iter().map(|&s| (s as f64 - size_mean).powi(2)).sum::<f64>() / k as f64;
    Ok(DiversityReport {
        mean_pairwise_distance: mean,
        normalized_score: mean / (pixels as f64).sqrt(),
        kmeans_cluster_size_cv: size_var.sqrt() / size_mean,
        k,
        pairs_evaluated: pairs,
    })
}

/// Lloyd iterations on flattened binary images. Empty clusters are re-seeded
/// with the point farthest from its current centroid.
fn kmeans_cluster_sizes(
    dataset: &[UnitCell],
    k: usize,
    rng: &mut crate::seed::Rng,
    max_iter: usize,
) -> Vec<usize> {
    let n = dataset.len();
    let dim = dataset[0].len();
    let ones: Vec<Vec<u32>> = dataset
        .iter()
        .map(|c| c.cells.iter().enumerate().filter(|(_, &v)| v == 1).map(|(i, _)| i as u32).collect())
        .collect();
    let mut centroids: Vec<Vec<f64>> = sample_indices(rng, n, k)
        .into_iter()
        .map(|i| dataset[i].cells.iter().map(|&v| f64::from(v)).collect())
        .collect();
    let mut assignment = vec![usize::MAX; n];
    let mut distances = vec![0.0; n];
    for _ in 0..max_iter {
        let norms: Vec<f64> = centroids.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
        let mut changed = false;
        for (i, idx) in ones.iter().enumerate() {
            // |x - c|² = Σ_{x=1}(1 - 2c) + |c|²
            let mut best = (f64::INFINITY, 0);
            for (j, c) in centroids.iter().enumerate() {
                let d = idx.iter().map(|&p| 1.0 - 2.0 * c[p as usize]).sum::<f64>() + norms[j];
                if d < best.0 {
                    best = (d, j);
                }
            }
            distances[i] = best.0;
            if assignment[i] != best.1 {
                assignment[i] = best.1;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; dim]; k];
        for (i, idx) in ones.iter().enumerate() {
            counts[assignment[i]] += 1;
            for &p in idx {
                sums[assignment[i]][p as usize] += 1.0;
            }
        }
        for j in 0..k {
            if counts[j] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                centroids[j] = dataset[far].cells.iter().map(|&v| f64::from(v)).collect();
                distances[far] = 0.0;
                changed = true;
            } else {
                let inv = 1.0 / counts[j] as f64;
                for (c, s) in centroids[j].iter_mut().zip(&sums[j]) {
                    *c = s * inv;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut counts = vec![0usize; k];
    for &a in &assignment {
        counts[a] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(width: usize, height: usize, values: &[f64]) -> RealField {
        RealField::new(width, height, values.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_field_is_deterministic_and_seed_sensitive() {
        let a = sample_gaussian_field(7, 48, 48, 8.0).unwrap();
        let b = sample_gaussian_field(7, 48, 48, 8.0).unwrap();
        let c = sample_gaussian_field(8, 48, 48, 8.0).unwrap();
        assert_eq!(a, b);
        assert!(a.values.iter().zip(&c.values).any(|(x, y)| x != y));
    }

    #[test]
    fn gaussian_field_rejects_bad_arguments() {
        assert!(matches!(sample_gaussian_field(1, 1, 8, 2.0), Err(Error::Argument(_))));
        assert!(matches!(sample_gaussian_field(1, 8, 8, 0.0), Err(Error::Argument(_))));
        assert!(matches!(sample_gaussian_field(1, 8, 8, f64::NAN), Err(Error::Argument(_))));
    }

    #[test]
    fn gaussian_field_moments_over_seeds() {
        // band established from a 100-seed Monte Carlo run of this generator
        for seed in 0..100 {
            let f = sample_gaussian_field(seed, 64, 64, 10.0).unwrap();
            assert!(f.mean().abs() <= 0.15, "seed {seed}: mean {}", f.mean());
            let s = f.std();
            assert!((0.7..=1.3).contains(&s), "seed {seed}: std {s}");
        }
    }

    #[test]
    fn binarize_extremes_and_rule() {
        let f = field(2, 2, &[-1.0, 0.0, 1.0, 2.0]);
        assert_eq!(volume_fraction(&binarize(&f, -5.0)), 1.0);
        assert_eq!(volume_fraction(&binarize(&f, 5.0)), 0.0);
        assert_eq!(binarize(&f, 0.5), UnitCell::from_rows(&[[0, 0], [1, 1]]).unwrap());
        // ties go to solid
        assert_eq!(binarize(&f, 1.0), UnitCell::from_rows(&[[0, 0], [1, 1]]).unwrap());
    }

    #[test]
    fn tie_rule_complement() {
        let f = field(3, 1, &[0.5, 0.2, 0.9]);
        let t = 0.5;
        let ge = binarize(&f, t);
        for (i, &v) in f.values.iter().enumerate() {
            let strict_less = u8::from(v < t);
            if v == t {
                assert_eq!(ge.cells()[i], 1);
                assert_eq!(strict_less, 0);
            } else {
                assert_eq!(ge.cells()[i], 1 - strict_less);
            }
        }
    }

    #[test]
    fn boundary_rule_examples() {
        let solid = UnitCell::filled(4, 4, 1).unwrap();
        let void = UnitCell::filled(4, 4, 0).unwrap();
        assert!(boundary_connectivity_ok(&solid, 0.1, true));
        assert!(!boundary_connectivity_ok(&void, 0.1, false));
        let inner = UnitCell::from_rows(&[[0, 0, 0, 0], [0, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 0]]).unwrap();
        assert!(!boundary_connectivity_ok(&inner, 0.1, false));
        assert!(boundary_connectivity_ok(&inner, 0.0, true));
    }

    #[test]
    fn connectivity_uses_periodic_wrap() {
        // two columns at the edges touch through the wrap
        let wrapped = UnitCell::from_rows(&[[1, 0, 0, 1], [1, 0, 0, 1]]).unwrap();
        assert!(solid_is_connected(&wrapped));
        let split = UnitCell::from_rows(&[[1, 0, 1, 0], [1, 0, 1, 0]]).unwrap();
        assert!(!solid_is_connected(&split));
        // diagonal contact is not 4-connectivity
        let diag = UnitCell::from_rows(&[[1, 0, 0], [0, 1, 0], [0, 0, 0]]).unwrap();
        assert!(!solid_is_connected(&diag));
    }

    #[test]
    fn mirror_examples() {
        let one = UnitCell::from_rows(&[[1]]).unwrap();
        assert_eq!(mirror_periodic(&one), UnitCell::filled(2, 2, 1).unwrap());
        let tile = UnitCell::from_rows(&[[1, 0], [0, 0]]).unwrap();
        let expected =
            UnitCell::from_rows(&[[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]]).unwrap();
        assert_eq!(mirror_periodic(&tile), expected);
    }

    #[test]
    fn mirror_quadrants_and_symmetry() {
        let f = sample_gaussian_field(3, 6, 5, 1.5).unwrap();
        let tile = binarize(&f, 0.1);
        let m = mirror_periodic(&tile);
        assert_eq!(m.flipped_horizontal(), m);
        assert_eq!(m.flipped_vertical(), m);
        let (w, h) = (tile.width(), tile.height());
        for y in 0..h {
            for x in 0..w {
                let v = tile.get(x, y);
                assert_eq!(m.get(x, y), v);
                assert_eq!(m.get(2 * w - 1 - x, y), v);
                assert_eq!(m.get(x, 2 * h - 1 - y), v);
                assert_eq!(m.get(2 * w - 1 - x, 2 * h - 1 - y), v);
            }
        }
        assert_eq!(volume_fraction(&m), volume_fraction(&tile));
    }

    #[test]
    fn interface_examples() {
        assert_eq!(extract_interface(&UnitCell::filled(5, 5, 1).unwrap()).count_ones(), 0);
        assert_eq!(extract_interface(&UnitCell::filled(5, 5, 0).unwrap()).count_ones(), 0);
        let mut cells = vec![0u8; 25];
        cells[2 * 5 + 2] = 1;
        let cell = UnitCell::new(5, 5, cells).unwrap();
        let mask = extract_interface(&cell);
        let set: Vec<(usize, usize)> = (0..25)
            .filter(|&i| mask.cells()[i] == 1)
            .map(|i| (i % 5, i / 5))
            .collect();
        assert_eq!(set, vec![(2, 1), (1, 2), (3, 2), (2, 3)]);
        assert_eq!(mask.phase_id(), INTERFACE);
    }

    #[test]
    fn interface_wraps_periodically() {
        let mut cells = vec![0u8; 16];
        cells[0] = 1;
        let mask = extract_interface(&UnitCell::new(4, 4, cells).unwrap());
        for (x, y) in [(1, 0), (3, 0), (0, 1), (0, 3)] {
            assert_eq!(mask.cells()[y * 4 + x], 1);
        }
        assert_eq!(mask.count_ones(), 4);
    }

    #[test]
    fn volume_fraction_examples() {
        assert_eq!(volume_fraction(&UnitCell::filled(3, 3, 1).unwrap()), 1.0);
        assert_eq!(volume_fraction(&UnitCell::filled(3, 3, 0).unwrap()), 0.0);
        assert_eq!(volume_fraction(&UnitCell::from_rows(&[[1, 0], [0, 1]]).unwrap()), 0.5);
    }

    #[test]
    fn dataset_generation_contract() {
        let config = GenConfig::default();
        let a = generate_dataset(5, 1, &config).unwrap();
        let b = generate_dataset(5, 1, &config).unwrap();
        assert_eq!(a, b);
        for cell in &a {
            assert_eq!((cell.width(), cell.height()), (96, 96));
            assert!(boundary_connectivity_ok(cell, config.min_boundary_fraction, true));
            let vf = volume_fraction(cell);
            assert!((0.30..=0.68).contains(&vf), "vf {vf}");
        }
        assert_ne!(a, generate_dataset(5, 2, &config).unwrap());
    }

    #[test]
    fn impossible_config_stalls() {
        let config = GenConfig { min_boundary_fraction: 1.0, density_band: (0.3, 0.31), ..GenConfig::default() };
        match generate_dataset(3, 1, &config) {
            Err(Error::GenerationStall(msg)) => assert!(msg.contains("density band")),
            other => panic!("expected stall, got {other:?}"),
        }
        assert!(generate_dataset(0, 1, &GenConfig::default()).is_err());
    }

    #[test]
    fn diversity_examples() {
        let a = UnitCell::filled(96, 96, 1).unwrap();
        let b = UnitCell::filled(96, 96, 0).unwrap();
        let same = diversity_stats(&[a.clone(), a.clone(), a.clone()], 2, 0, 100).unwrap();
        assert_eq!(same.mean_pairwise_distance, 0.0);
        assert_eq!(same.normalized_score, 0.0);
        let pair = diversity_stats(&[a.clone(), b], 2, 0, 100).unwrap();
        assert_eq!(pair.mean_pairwise_distance, 96.0);
        assert_eq!(pair.normalized_score, 1.0);
        assert_eq!(pair.kmeans_cluster_size_cv, 0.0);
        assert!(matches!(diversity_stats(&[a.clone(), a], 3, 0, 10), Err(Error::Argument(_))));
    }

    #[test]
    fn diversity_subsamples_pairs() {
        let cells = generate_dataset(12, 4, &GenConfig::default()).unwrap();
        let full = diversity_stats(&cells, 3, 9, 1_000).unwrap();
        assert_eq!(full.pairs_evaluated, 66);
        let sub = diversity_stats(&cells, 3, 9, 20).unwrap();
        assert_eq!(sub.pairs_evaluated, 20);
        assert!(full.normalized_score > 0.3 && full.normalized_score < 1.0);
        assert!((sub.normalized_score - full.normalized_score).abs() < 0.15);
    }
}
