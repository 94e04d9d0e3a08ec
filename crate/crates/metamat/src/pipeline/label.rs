use std::path::PathBuf;

use clap::Args;
use metamat_core::geometry::UnitCell;
use metamat_core::homogenize::{collect_labels, label_cell, LabelBatch, LabelConfig, Material};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kept_path, required};
use crate::error::{PipelineError, Result};
use crate::formats::csvio::{self, LabelRecord};
use crate::formats::mksd;
use crate::manifest::RunRecorder;

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LabelArgs {
    /// Input MKSD file.
    #[arg(long)]
    pub cells: Option<PathBuf>,
    /// Output labels CSV; the kept-index list goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub kept: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub filter_threshold: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub youngs_modulus: Option<f64>,
    #[arg(long)]
    pub poissons_ratio: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
struct LabelParams {
    tol: f64,
    beta: f64,
    filter_threshold: f64,
    max_iter: Option<usize>,
    youngs_modulus: f64,
    poissons_ratio: f64,
}

pub fn material(e: Option<f64>, nu: Option<f64>) -> Result<Material> {
    let d = Material::default();
    Ok(Material::new(e.unwrap_or(d.youngs_modulus), nu.unwrap_or(d.poissons_ratio))?)
}

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| PipelineError::Argument(format!("cannot start worker threads: {e}")))
}

/// Labels cells in parallel; results keep input order.
pub fn label_parallel(cells: &[UnitCell], material: &Material, config: &LabelConfig) -> LabelBatch {
    let results = cells
        .par_iter()
        .enumerate()
        .map_init(|| None, |solver, (i, cell)| label_cell(solver, i, cell, material, config))
        .collect();
    collect_labels(results, config.filter_threshold)
}

pub fn run(args: &LabelArgs) -> Result<PathBuf> {
    let cells_path = required(args.cells.clone(), "cells")?;
    let out = required(args.out.clone(), "out")?;
    let kept_out = args.kept.clone().unwrap_or_else(|| kept_path(&out));
    let d = LabelConfig::default();
    let config = LabelConfig {
        tol: args.tol.unwrap_or(d.tol),
        beta: args.beta.unwrap_or(d.beta),
        filter_threshold: args.filter_threshold.unwrap_or(d.filter_threshold),
        max_iter: args.max_iter,
    };
    let ok = config.filter_threshold >= 0.0 && config.tol > 0.0 && config.beta > 0.0;
    if !ok {
        return Err(PipelineError::Argument("--tol and --beta must be positive, --filter-threshold non-negative".into()));
    }
    let material = material(args.youngs_modulus, args.poissons_ratio)?;
    let params = LabelParams {
        tol: config.tol,
        beta: config.beta,
        filter_threshold: config.filter_threshold,
        max_iter: config.max_iter,
        youngs_modulus: material.youngs_modulus,
        poissons_ratio: material.poissons_ratio,
    };
    let mut rec = RunRecorder::new("label", None, &params);
    rec.input("cells", &cells_path)?;
    let cells = mksd::read(&cells_path)?;
    let pool = thread_pool(args.jobs)?;
    let batch = rec.time("solve", || pool.install(|| label_parallel(&cells, &material, &config)));
    for (i, e) in &batch.failures {
        log::warn!("cell {i} failed: {e}");
    }
    let unconverged = batch.labels.iter().filter(|l| !l.converged).count();
    if unconverged > 0 {
        log::warn!("{unconverged} cells did not reach the tolerance; see the converged column");
    }
    if batch.labels.is_empty() {
        return Err(PipelineError::Numerical(format!("all {} cells failed to solve", cells.len())));
    }
    log::info!(
        "labeled {} cells: {} kept, {} below {}, {} failed",
        batch.labels.len(),
        batch.kept.len(),
        batch.dropped.len(),
        config.filter_threshold,
        batch.failures.len()
    );
    let records: Vec<LabelRecord> = batch.labels.iter().map(LabelRecord::from).collect();
    csvio::write_labels(&out, &records)?;
    csvio::write_indices(&kept_out, &batch.kept)?;
    rec.output("labels", &out)?;
    rec.output("kept", &kept_out)?;
    rec.write(&out)?;
    Ok(out)
}
