use std::path::PathBuf;

use clap::Args;
use metamat_core::seed::derive_seed;
use metamat_core::statistics::{pca_fit, pca_transform, LazyFeatures, RowSource};
use serde::{Deserialize, Serialize};

use super::artifacts::{combination_of, pca_to_mksm, rescale_from_mksm, RESCALE_KIND};
use super::required;
use crate::error::{PipelineError, Result};
use crate::formats::mksd;
use crate::formats::mksm::Mksm;
use crate::manifest::RunRecorder;

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PcaArgs {
    /// Input MKSD file.
    #[arg(long)]
    pub cells: Option<PathBuf>,
    /// Rescale model written by `features`.
    #[arg(long)]
    pub rescale: Option<PathBuf>,
    /// Components to keep.
    #[arg(long)]
    pub n_components: Option<usize>,
    /// Output PCA model with the scores of every cell (MKSM).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
struct PcaParams {
    combination: String,
    n_components: usize,
}

pub fn run(args: &PcaArgs, seed: u64) -> Result<PathBuf> {
    let cells_path = required(args.cells.clone(), "cells")?;
    let rescale_path = required(args.rescale.clone(), "rescale")?;
    let out = required(args.out.clone(), "out")?;
    let n_components = args.n_components.unwrap_or(8);
    let container = Mksm::read(&rescale_path, RESCALE_KIND, "features")?;
    let combination = combination_of(&container)?;
    let rescale = rescale_from_mksm(&container, &rescale_path)?;
    let params = PcaParams { combination: combination.tag().into(), n_components };
    let mut rec = RunRecorder::new("pca", Some(seed), &params);
    rec.input("cells", &cells_path)?;
    rec.input("rescale", &rescale_path)?;
    let cells = mksd::read(&cells_path)?;
    let lazy = LazyFeatures::new(&cells, combination, Some(rescale))?;
    if container.attr_u64("n_features")? != lazy.ncols() as u64 {
        return Err(PipelineError::Argument(format!(
            "rescale model was fitted on {} features, the cells give {}",
            container.attr_u64("n_features")?,
            lazy.ncols()
        )));
    }
    let model = rec.time("fit", || pca_fit(&lazy, n_components, derive_seed(seed, "pca")))?;
    let scores = rec.time("transform", || pca_transform(&model, &lazy))?;
    let captured: f64 = model.explained_variance.iter().sum::<f64>() / model.total_variance;
    log::info!("{n_components} components capture {:.2}% of the variance", 100.0 * captured);
    pca_to_mksm(&model, &scores, combination).write(&out)?;
    rec.output("pca", &out)?;
    rec.write(&out)?;
    Ok(out)
}
