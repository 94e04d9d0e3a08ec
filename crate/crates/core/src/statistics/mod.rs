//! Periodic 2-point statistics, variance-equalizing rescaling, feature
//! assembly, PCA and score standardization.

mod pca;
mod scaler;

pub use pca::{pca_fit, pca_reconstruct, pca_transform, PcaModel, RANDOMIZED_OVERSAMPLING, RANDOMIZED_POWER_ITERATIONS};
pub use scaler::{standardize_scores, Standardizer};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use num_complex::Complex64;

use crate::error::{arg_err, Error, Result};
use crate::fft::Fft2;
use crate::geometry::{extract_interface, BinaryGrid, PhaseMask, UnitCell, INTERFACE, SOLID};
use crate::linalg::Matrix;

/// Ordered pair of local states `(h, h')`.
pub type Pair = (u8, u8);

pub const SOLID_AUTO: Pair = (SOLID, SOLID);
pub const INTERFACE_AUTO: Pair = (INTERFACE, INTERFACE);
pub const SOLID_INTERFACE: Pair = (SOLID, INTERFACE);

/// Largest imaginary residue tolerated after the inverse transform.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Periodic 2-point statistics stored in canonical (unshifted) order:
/// `values[dy * width + dx]` is the probability that a pixel carries state
/// `h` and the pixel shifted by `(dx, dy)` carries `h'`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    pair: Pair,
}

impl CorrelationMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>, pair: Pair) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} values for a {width}x{height} correlation map",
                values.len()
            )));
        }
        Ok(Self { width, height, values, pair })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pair(&self) -> Pair {
        self.pair
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at shift `(dx, dy)`, wrapped periodically.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let x = dx.rem_euclid(self.width as isize) as usize;
        let y = dy.rem_euclid(self.height as isize) as usize;
        self.values[y * self.width + x]
    }

    /// Display order with the zero shift moved to the grid center.
    pub fn fftshifted(&self) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                out[((y + h / 2) % h) * w + (x + w / 2) % w] = self.values[y * w + x];
            }
        }
        out
    }
}

fn check_same_shape(a: &PhaseMask, b: &PhaseMask) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(arg_err!(
            "mask shapes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        ));
    }
    Ok(())
}

/// Every entry of a binary-mask correlation is an integer count over `|S|`;
/// snapping to that lattice removes the transform's rounding noise exactly.
fn snap(value: f64, bins: f64) -> f64 {
    ((value * bins).round() / bins).clamp(0.0, 1.0)
}

/// Correlation of two binary masks via the transform identity
/// `f = IFFT(conj(FFT(a)) · FFT(b)) / |S|`.
pub fn two_point_fft(mask_a: &PhaseMask, mask_b: &PhaseMask) -> Result<CorrelationMap> {
    check_same_shape(mask_a, mask_b)?;
    let mut engine = CorrelationEngine::new(mask_a.width(), mask_a.height());
    engine.correlate(mask_a.cells(), mask_b.cells(), (mask_a.phase_id(), mask_b.phase_id()))
}

/// Direct periodic double sum; quadratic cost, used as an oracle.
pub fn two_point_direct(mask_a: &PhaseMask, mask_b: &PhaseMask) -> Result<CorrelationMap> {
    check_same_shape(mask_a, mask_b)?;
    let (w, h) = (mask_a.width(), mask_a.height());
    let (a, b) = (mask_a.cells(), mask_b.cells());
    let mut values = vec![0.0; w * h];
    for dy in 0..h {
        for dx in 0..w {
            let mut count = 0u64;
            for y in 0..h {
                for x in 0..w {
                    let shifted = ((y + dy) % h) * w + (x + dx) % w;
                    count += u64::from(a[y * w + x] & b[shifted]);
                }
            }
            values[dy * w + dx] = count as f64 / (w * h) as f64;
        }
    }
    CorrelationMap::new(w, h, values, (mask_a.phase_id(), mask_b.phase_id()))
}

/// Correlation sets considered as model inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Combination {
    /// Solid auto-correlation only.
    S,
    /// Solid and interface auto-correlations.
    SI,
    /// Solid and interface autos plus the solid–interface cross-correlation.
    SIX,
}

impl Combination {
    pub const ALL: [Combination; 3] = [Combination::S, Combination::SI, Combination::SIX];

    pub fn pairs(self) -> &'static [Pair] {
        match self {
            Combination::S => &[SOLID_AUTO],
            Combination::SI => &[SOLID_AUTO, INTERFACE_AUTO],
            Combination::SIX => &[SOLID_AUTO, INTERFACE_AUTO, SOLID_INTERFACE],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Combination::S => "s",
            Combination::SI => "si",
            Combination::SIX => "six",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "s" | "S" => Ok(Combination::S),
            "si" | "SI" | "S+I" => Ok(Combination::SI),
            "six" | "SIX" | "S+I+X" => Ok(Combination::SIX),
            other => Err(arg_err!("unknown combination '{other}' (expected s, si or six)")),
        }
    }

    fn needs_interface(self) -> bool {
        self != Combination::S
    }
}

/// Reusable transform workspace for one grid size.
#[derive(Clone, Debug)]
pub struct CorrelationEngine {
    fft: Fft2,
    spectrum_a: Vec<Complex64>,
    spectrum_b: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl CorrelationEngine {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        let zero = Complex64::new(0.0, 0.0);
        Self { fft: Fft2::new(width, height), spectrum_a: vec![zero; n], spectrum_b: vec![zero; n], work: vec![zero; n] }
    }

    pub fn width(&self) -> usize {
        self.fft.width()
    }

    pub fn height(&self) -> usize {
        self.fft.height()
    }

    /// Spectra of two real grids from one complex transform of `a + i·b`.
    fn load_spectra(&mut self, a: &[u8], b: &[u8]) {
        for ((z, &p), &q) in self.work.iter_mut().zip(a).zip(b) {
            *z = Complex64::new(f64::from(p), f64::from(q));
        }
        self.fft.forward(&mut self.work);
        let (w, h) = (self.fft.width(), self.fft.height());
        for ky in 0..h {
            for kx in 0..w {
                let k = ky * w + kx;
                let m = ((h - ky) % h) * w + (w - kx) % w;
                let z = self.work[k];
                let zc = self.work[m].conj();
                self.spectrum_a[k] = (z + zc) * 0.5;
                self.spectrum_b[k] = Complex64::new(0.0, -0.5) * (z - zc);
            }
        }
    }

    fn inverse_product(&mut self, first: bool, second: bool, pair: Pair) -> Result<CorrelationMap> {
        let pick = |s: &Self, b: bool, k: usize| if b { s.spectrum_b[k] } else { s.spectrum_a[k] };
        for k in 0..self.work.len() {
            self.work[k] = pick(self, first, k).conj() * pick(self, second, k);
        }
        self.fft.inverse_normalized(&mut self.work);
        let max_imag = self.work.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        let bins = self.work.len() as f64;
        let max_imag = max_imag / bins;
        if max_imag > IMAGINARY_TOLERANCE {
            return Err(Error::Numerical(format!(
                "correlation {pair:?} has imaginary residue {max_imag:e}"
            )));
        }
        let values = self.work.iter().map(|z| snap(z.re / bins, bins)).collect();
        CorrelationMap::new(self.fft.width(), self.fft.height(), values, pair)
    }

    /// Correlation of two raw binary grids of this engine's shape.
    pub fn correlate(&mut self, a: &[u8], b: &[u8], pair: Pair) -> Result<CorrelationMap> {
        let n = self.work.len();
        if a.len() != n || b.len() != n {
            return Err(arg_err!("grids of {} and {} pixels for a {n}-pixel engine", a.len(), b.len()));
        }
        self.load_spectra(a, b);
        self.inverse_product(false, true, pair)
    }

    /// Raw correlation maps of one cell in combination order.
    pub fn cell_correlations(&mut self, cell: &UnitCell, combination: Combination) -> Result<Vec<CorrelationMap>> {
        if cell.width() != self.width() || cell.height() != self.height() {
            return Err(arg_err!(
                "cell is {}x{}, engine is {}x{}",
                cell.width(),
                cell.height(),
                self.width(),
                self.height()
            ));
        }
        let interface = if combination.needs_interface() {
            extract_interface(cell)
        } else {
            PhaseMask::new(cell.width(), cell.height(), vec![0; cell.len()], INTERFACE)?
        };
        self.load_spectra(cell.cells(), interface.cells());
        combination
            .pairs()
            .iter()
            .map(|&pair| {
                let side = |h: u8| h == INTERFACE;
                self.inverse_product(side(pair.0), side(pair.1), pair)
            })
            .collect()
    }

    /// Concatenated (optionally rescaled) maps of one cell written to `out`.
    pub fn feature_row(
        &mut self,
        cell: &UnitCell,
        combination: Combination,
        rescale: Option<&RescaleModel>,
        out: &mut [f64],
    ) -> Result<()> {
        let bins = self.width() * self.height();
        if out.len() != bins * combination.pairs().len() {
            return Err(Error::Dimension(format!("feature row of length {}", out.len())));
        }
        for (map, chunk) in self.cell_correlations(cell, combination)?.into_iter().zip(out.chunks_exact_mut(bins)) {
            let factor = match rescale {
                Some(model) => model.factor(map.pair())?,
                None => 1.0,
            };
            write_scaled(map.values(), factor, chunk);
        }
        Ok(())
    }
}

fn write_scaled(values: &[f64], factor: f64, out: &mut [f64]) {
    if factor == 1.0 {
        out.copy_from_slice(values);
    } else {
        for (o, v) in out.iter_mut().zip(values) {
            *o = v * factor;
        }
    }
}

/// Per-pair ensemble statistics of raw correlations.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaleModel {
    /// `(pair, mean, std)` in first-seen order.
    pub pairs: Vec<(Pair, f64, f64)>,
    /// Standard deviation of the solid auto-correlation set.
    pub reference_std: f64,
}

impl RescaleModel {
    pub fn stats(&self, pair: Pair) -> Option<(f64, f64)> {
        self.pairs.iter().find(|p| p.0 == pair).map(|p| (p.1, p.2))
    }

    /// Multiplier `σ¹¹ / σ^{hh'}`; exactly 1 for the solid auto-correlation.
    pub fn factor(&self, pair: Pair) -> Result<f64> {
        if pair == SOLID_AUTO {
            return Ok(1.0);
        }
        let (_, std) = self.stats(pair).ok_or_else(|| arg_err!("pair {pair:?} not in rescale model"))?;
        Ok(self.reference_std / std)
    }
}

/// Streaming mean/variance per pair (Chan's parallel merge of per-map moments).
#[derive(Clone, Debug, Default)]
pub struct RescaleAccumulator {
    entries: Vec<PairMoments>,
}

#[derive(Clone, Debug)]
struct PairMoments {
    pair: Pair,
    maps: usize,
    count: f64,
    mean: f64,
    m2: f64,
}

impl RescaleAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_values(&mut self, pair: Pair, values: &[f64]) {
        let n = values.len() as f64;
        if n == 0.0 {
            return;
        }
        let mean = values.iter().sum::<f64>() / n;
        let m2: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let entry = match self.entries.iter_mut().position(|e| e.pair == pair) {
            Some(i) => &mut self.entries[i],
            None => {
                self.entries.push(PairMoments { pair, maps: 0, count: 0.0, mean: 0.0, m2: 0.0 });
                self.entries.last_mut().unwrap()
            }
        };
        let total = entry.count + n;
        let delta = mean - entry.mean;
        entry.mean += delta * n / total;
        entry.m2 += m2 + delta * delta * entry.count * n / total;
        entry.count = total;
        entry.maps += 1;
    }

    pub fn push(&mut self, map: &CorrelationMap) {
        self.push_values(map.pair(), map.values());
    }

    pub fn finish(&self) -> Result<RescaleModel> {
        let reference = self
            .entries
            .iter()
            .find(|e| e.pair == SOLID_AUTO)
            .ok_or_else(|| arg_err!("ensemble has no solid auto-correlation"))?;
        if reference.maps < 2 {
            return Err(arg_err!("rescaling needs at least 2 cells, got {}", reference.maps));
        }
        if let Some(e) = self.entries.iter().find(|e| e.maps != reference.maps) {
            return Err(arg_err!(
                "pair {:?} present for {} cells, solid auto for {}",
                e.pair,
                e.maps,
                reference.maps
            ));
        }
        let mut pairs = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let std = (e.m2 / e.count).sqrt();
            if !(std > 0.0) {
                return Err(Error::DegenerateEnsemble(pair_name(e.pair)));
            }
            pairs.push((e.pair, e.mean, std));
        }
        let reference_std = pairs.iter().find(|p| p.0 == SOLID_AUTO).map(|p| p.2).unwrap();
        Ok(RescaleModel { pairs, reference_std })
    }
}

fn pair_name(pair: Pair) -> String {
    format!("({},{})", pair.0, pair.1)
}

/// Fits per-pair means and population standard deviations over all bins
/// and all cells.
pub fn fit_rescale<'a>(maps: impl IntoIterator<Item = &'a CorrelationMap>) -> Result<RescaleModel> {
    let mut acc = RescaleAccumulator::new();
    for map in maps {
        acc.push(map);
    }
    acc.finish()
}

pub fn apply_rescale(map: &CorrelationMap, model: &RescaleModel) -> Result<CorrelationMap> {
    let factor = model.factor(map.pair())?;
    let mut out = map.clone();
    write_scaled(map.values(), factor, &mut out.values);
    Ok(out)
}

/// Row-major feature matrix tagged with its correlation combination.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub combination: Combination,
    pub data: Matrix,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn cols(&self) -> usize {
        self.data.cols()
    }
}

fn check_uniform_shape(cells: &[UnitCell]) -> Result<(usize, usize)> {
    let first = cells.first().ok_or_else(|| arg_err!("empty dataset"))?;
    let shape = (first.width(), first.height());
    if let Some(i) = cells.iter().position(|c| (c.width(), c.height()) != shape) {
        return Err(arg_err!("cell {i} differs in shape from cell 0"));
    }
    Ok(shape)
}

/// Raw (unscaled) correlation features, one row per cell.
pub fn raw_features(cells: &[UnitCell], combination: Combination) -> Result<FeatureMatrix> {
    let (w, h) = check_uniform_shape(cells)?;
    let cols = w * h * combination.pairs().len();
    let mut data = Matrix::zeros(cells.len(), cols);
    let mut engine = CorrelationEngine::new(w, h);
    for (i, cell) in cells.iter().enumerate() {
        engine.feature_row(cell, combination, None, data.row_mut(i))?;
    }
    Ok(FeatureMatrix { combination, data })
}

/// Rescale statistics of a raw feature matrix (blocks split by pair).
pub fn fit_rescale_features(features: &FeatureMatrix) -> Result<RescaleModel> {
    let pairs = features.combination.pairs();
    let bins = features.cols() / pairs.len();
    let mut acc = RescaleAccumulator::new();
    for i in 0..features.rows() {
        for (&pair, block) in pairs.iter().zip(features.data.row(i).chunks_exact(bins)) {
            acc.push_values(pair, block);
        }
    }
    acc.finish()
}

/// Rescales every block of a raw feature matrix in place.
pub fn apply_rescale_features(features: &mut FeatureMatrix, model: &RescaleModel) -> Result<()> {
    let pairs = features.combination.pairs();
    let bins = features.cols() / pairs.len();
    let factors = pairs.iter().map(|&p| model.factor(p)).collect::<Result<Vec<_>>>()?;
    for i in 0..features.rows() {
        for (&factor, block) in factors.iter().zip(features.data.row_mut(i).chunks_exact_mut(bins)) {
            if factor != 1.0 {
                block.iter_mut().for_each(|v| *v *= factor);
            }
        }
    }
    Ok(())
}

/// Rescaled features for a dataset. The rescale model is fitted on the same
/// dataset unless one is supplied.
pub fn assemble_features(
    cells: &[UnitCell],
    combination: Combination,
    model: Option<&RescaleModel>,
) -> Result<(FeatureMatrix, RescaleModel)> {
    let mut features = raw_features(cells, combination)?;
    let model = match model {
        Some(m) => m.clone(),
        None => fit_rescale_features(&features)?,
    };
    apply_rescale_features(&mut features, &model)?;
    Ok((features, model))
}

/// Sequential access to the rows of a (possibly virtual) matrix.
pub trait RowSource {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn read_row(&self, i: usize, out: &mut [f64]) -> Result<()>;
}

impl RowSource for Matrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn read_row(&self, i: usize, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(self.row(i));
        Ok(())
    }
}

impl RowSource for FeatureMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn read_row(&self, i: usize, out: &mut [f64]) -> Result<()> {
        self.data.read_row(i, out)
    }
}

/// Feature rows computed on demand from cells, for datasets whose feature
/// matrix does not fit in memory.
pub struct LazyFeatures<'a> {
    cells: &'a [UnitCell],
    combination: Combination,
    rescale: Option<RescaleModel>,
    engine: RefCell<CorrelationEngine>,
    cols: usize,
}

impl<'a> LazyFeatures<'a> {
    pub fn new(cells: &'a [UnitCell], combination: Combination, rescale: Option<RescaleModel>) -> Result<Self> {
        let (w, h) = check_uniform_shape(cells)?;
        Ok(Self {
            cells,
            combination,
            rescale,
            engine: RefCell::new(CorrelationEngine::new(w, h)),
            cols: w * h * combination.pairs().len(),
        })
    }

    /// Fits the rescale model with one pass over the cells.
    pub fn fit_rescale(&self) -> Result<RescaleModel> {
        let mut acc = RescaleAccumulator::new();
        let mut engine = self.engine.borrow_mut();
        for cell in self.cells {
            for map in engine.cell_correlations(cell, self.combination)? {
                acc.push(&map);
            }
        }
        acc.finish()
    }
}

impl RowSource for LazyFeatures<'_> {
    fn nrows(&self) -> usize {
        self.cells.len()
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn read_row(&self, i: usize, out: &mut [f64]) -> Result<()> {
        self.engine.borrow_mut().feature_row(&self.cells[i], self.combination, self.rescale.as_ref(), out)
    }
}
