//! Mapping of core models onto `MKSM` containers.

use std::path::Path;

use metamat_core::gpr::{GprModel, Hyperparameters};
use metamat_core::linalg::Matrix;
use metamat_core::statistics::{Combination, PcaModel, RescaleModel, Standardizer};

use crate::error::{PipelineError, Result};
use crate::formats::mksm::Mksm;

pub const RESCALE_KIND: &str = "rescale";
pub const PCA_KIND: &str = "pca";
pub const GPR_KIND: &str = "gpr";
pub const FEATURES_KIND: &str = "features";

pub fn combination_of(m: &Mksm) -> Result<Combination> {
    Ok(Combination::parse(m.attr_str("combination")?)?)
}

pub fn rescale_to_mksm(model: &RescaleModel, combination: Combination, width: usize, height: usize) -> Result<Mksm> {
    let mut m = Mksm::new(RESCALE_KIND);
    m.set_attr("combination", combination.tag());
    m.set_attr("width", width);
    m.set_attr("height", height);
    m.set_attr("n_features", width * height * combination.pairs().len());
    m.set_attr("reference_std", model.reference_std);
    let pairs: Vec<f64> = model.pairs.iter().flat_map(|p| [f64::from(p.0 .0), f64::from(p.0 .1)]).collect();
    m.push_array("pairs", &[model.pairs.len(), 2], pairs);
    m.push_vector("mean", &model.pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    m.push_vector("std", &model.pairs.iter().map(|p| p.2).collect::<Vec<_>>());
    let factors = combination.pairs().iter().map(|&p| model.factor(p)).collect::<metamat_core::Result<Vec<_>>>()?;
    m.push_vector("factor", &factors);
    Ok(m)
}

pub fn rescale_from_mksm(m: &Mksm, path: &Path) -> Result<RescaleModel> {
    let pairs = m.matrix("pairs")?;
    let mean = m.vector("mean")?;
    let std = m.vector("std")?;
    if pairs.cols() != 2 || mean.len() != pairs.rows() || std.len() != pairs.rows() {
        return Err(PipelineError::format(path, "inconsistent rescale arrays"));
    }
    let entries = (0..pairs.rows())
        .map(|i| {
            let (a, b) = (pairs[(i, 0)], pairs[(i, 1)]);
            if !(0.0..=255.0).contains(&a) || !(0.0..=255.0).contains(&b) {
                return Err(PipelineError::format(path, format!("invalid phase pair ({a}, {b})")));
            }
            Ok(((a as u8, b as u8), mean[i], std[i]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RescaleModel { pairs: entries, reference_std: m.attr_f64("reference_std")? })
}

pub fn pca_to_mksm(model: &PcaModel, scores: &Matrix, combination: Combination) -> Mksm {
    let mut m = Mksm::new(PCA_KIND);
    m.set_attr("combination", combination.tag());
    m.set_attr("n_components", model.rank());
    m.set_attr("n_features", model.n_features());
    m.set_attr("n_cells", scores.rows());
    m.set_attr("total_variance", model.total_variance);
    m.push_vector("mean", &model.mean);
    m.push_matrix("basis", &model.basis);
    m.push_vector("explained_variance", &model.explained_variance);
    m.push_matrix("scores", scores);
    m
}

pub fn pca_from_mksm(m: &Mksm, path: &Path) -> Result<(PcaModel, Matrix)> {
    let model = PcaModel {
        mean: m.vector("mean")?,
        basis: m.matrix("basis")?,
        explained_variance: m.vector("explained_variance")?,
        total_variance: m.attr_f64("total_variance")?,
    };
    let scores = m.matrix("scores")?;
    if model.basis.cols() != model.mean.len()
        || model.explained_variance.len() != model.basis.rows()
        || scores.cols() != model.basis.rows()
    {
        return Err(PipelineError::format(path, "inconsistent PCA arrays"));
    }
    Ok((model, scores))
}

/// Trained model with its input standardization.
#[derive(Clone, Debug)]
pub struct StoredGpr {
    pub model: GprModel,
    pub scaler: Standardizer,
    pub combination: Combination,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn indices_to_f64(v: &[usize]) -> Vec<f64> {
    v.iter().map(|&i| i as f64).collect()
}

fn indices_from_f64(v: &[f64], path: &Path) -> Result<Vec<usize>> {
    v.iter()
        .map(|&x| {
            if x >= 0.0 && x.fract() == 0.0 && x < 9.0e15 {
                Ok(x as usize)
            } else {
                Err(PipelineError::format(path, format!("invalid index {x}")))
            }
        })
        .collect()
}

pub fn gpr_to_mksm(stored: &StoredGpr) -> Mksm {
    let mut m = Mksm::new(GPR_KIND);
    m.set_attr("combination", stored.combination.tag());
    m.set_attr("n_components", stored.scaler.dim());
    m.set_attr("n_train", stored.model.n_train());
    m.set_attr("mean_shift", stored.model.mean_shift());
    m.set_attr("jitter", stored.model.jitter());
    m.push_vector("theta", &stored.model.hyperparameters().to_vec());
    m.push_matrix("x", stored.model.inputs());
    m.push_vector("y", stored.model.targets());
    m.push_vector("scaler_mean", &stored.scaler.mean);
    m.push_vector("scaler_std", &stored.scaler.std);
    m.push_vector("train_indices", &indices_to_f64(&stored.train));
    m.push_vector("test_indices", &indices_to_f64(&stored.test));
    m
}

/// Restores a model; the factorization is recomputed and checked against
/// the stored mean shift and jitter.
pub fn gpr_from_mksm(m: &Mksm, path: &Path) -> Result<StoredGpr> {
    let theta = Hyperparameters::from_slice(&m.vector("theta")?)?;
    let model = GprModel::condition(m.matrix("x")?, &m.vector("y")?, theta)?;
    let (shift, jitter) = (m.attr_f64("mean_shift")?, m.attr_f64("jitter")?);
    if model.mean_shift().to_bits() != shift.to_bits() || model.jitter().to_bits() != jitter.to_bits() {
        return Err(PipelineError::format(
            path,
            format!(
                "recomputed factorization differs from the stored one (shift {} vs {shift}, jitter {} vs {jitter})",
                model.mean_shift(),
                model.jitter()
            ),
        ));
    }
    let scaler = Standardizer { mean: m.vector("scaler_mean")?, std: m.vector("scaler_std")? };
    if scaler.mean.len() != model.inputs().cols() || scaler.std.len() != scaler.mean.len() {
        return Err(PipelineError::format(path, "scaler does not match the model inputs"));
    }
    Ok(StoredGpr {
        model,
        scaler,
        combination: combination_of(m)?,
        train: indices_from_f64(&m.vector("train_indices")?, path)?,
        test: indices_from_f64(&m.vector("test_indices")?, path)?,
    })
}
