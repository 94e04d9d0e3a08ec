use std::path::PathBuf;

use clap::Args;
use metamat_core::geometry::BinaryGrid;
use metamat_core::linalg::Matrix;
use metamat_core::statistics::{Combination, LazyFeatures, RowSource};
use serde::{Deserialize, Serialize};

use super::artifacts::{rescale_to_mksm, FEATURES_KIND};
use super::required;
use crate::error::{PipelineError, Result};
use crate::formats::mksd;
use crate::formats::mksm::Mksm;
use crate::manifest::RunRecorder;

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FeaturesArgs {
    /// Input MKSD file.
    #[arg(long)]
    pub cells: Option<PathBuf>,
    /// Correlation set: s, si or six.
    #[arg(long)]
    pub combination: Option<String>,
    /// Output rescale model (MKSM).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the full rescaled feature matrix (MKSM).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
struct FeaturesParams {
    combination: String,
    n_features: usize,
}

pub fn run(args: &FeaturesArgs) -> Result<PathBuf> {
    let cells_path = required(args.cells.clone(), "cells")?;
    let out = required(args.out.clone(), "out")?;
    let combination = Combination::parse(args.combination.as_deref().unwrap_or("si"))?;
    let cells = mksd::read(&cells_path)?;
    let first = cells.first().ok_or_else(|| PipelineError::Argument("the cell dataset is empty".into()))?;
    let (width, height) = (first.width(), first.height());
    let lazy = LazyFeatures::new(&cells, combination, None)?;
    let params = FeaturesParams { combination: combination.tag().into(), n_features: lazy.ncols() };
    let mut rec = RunRecorder::new("features", None, &params);
    rec.input("cells", &cells_path)?;
    let model = rec.time("rescale", || lazy.fit_rescale())?;
    rescale_to_mksm(&model, combination, width, height)?.write(&out)?;
    rec.output("rescale", &out)?;
    log::info!("{} features per cell ({})", lazy.ncols(), combination.tag());
    if let Some(matrix_path) = &args.matrix {
        let scaled = LazyFeatures::new(&cells, combination, Some(model))?;
        let data = rec.time("matrix", || -> Result<Matrix> {
            let mut data = Matrix::zeros(scaled.nrows(), scaled.ncols());
            for i in 0..scaled.nrows() {
                scaled.read_row(i, data.row_mut(i))?;
            }
            Ok(data)
        })?;
        let mut m = Mksm::new(FEATURES_KIND);
        m.set_attr("combination", combination.tag());
        m.push_matrix("features", &data);
        m.write(matrix_path)?;
        rec.output("matrix", matrix_path)?;
    }
    rec.write(&out)?;
    Ok(out)
}
