//! Subcommands. Each takes its flag struct (also readable from the config
//! file section of the same name), the global seed, and writes its artifacts
//! plus a run manifest.

pub mod al;
pub mod artifacts;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod gen;
pub mod import;
pub mod label;
pub mod pca;
pub mod plot;
pub mod sweep;
pub mod train;

use std::path::{Path, PathBuf};

use crate::error::{PipelineError, Result};

pub fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| PipelineError::Argument(format!("missing required --{flag}")))
}

/// `dir/name.ext` becomes `dir/name.<tag>.<ext>`.
pub fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

/// Default kept-index list next to a labels file.
pub fn kept_path(labels: &Path) -> PathBuf {
    sibling(labels, "kept")
}

pub fn check_fraction(value: f64, flag: &str) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(PipelineError::Argument(format!("--{flag} must lie in (0, 1), got {value}")))
    }
}

/// Labels spread over the cell index range plus the kept-index list.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSet {
    /// One entry per cell; NaN where the cell has no label.
    pub y: Vec<f64>,
    pub kept: Vec<usize>,
}

pub fn load_labeled(labels: &Path, kept: &Path, n_cells: usize) -> Result<LabeledSet> {
    let records = crate::formats::csvio::read_labels(labels)?;
    let kept_indices = crate::formats::csvio::read_indices(kept, "label")?;
    let mut y = vec![f64::NAN; n_cells];
    for r in &records {
        let slot = y.get_mut(r.index).ok_or_else(|| {
            PipelineError::format(labels, format!("label for cell {} but the dataset has {n_cells} cells", r.index))
        })?;
        *slot = r.normalized_c11;
    }
    if let Some(&bad) = kept_indices.iter().find(|&&i| i >= n_cells || !y[i].is_finite()) {
        return Err(PipelineError::format(kept, format!("kept cell {bad} has no label")));
    }
    Ok(LabeledSet { y, kept: kept_indices })
}
