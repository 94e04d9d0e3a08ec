use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use metamat_core::active::{
    aggregate_curves, run as run_loop, ActiveConfig, AggregateRow, Labels, LearningCurve, RefitSchedule, Scaling,
    StopRule,
};
use metamat_core::homogenize::{label_cell, LabelConfig};
use metamat_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use super::artifacts::{pca_from_mksm, PCA_KIND};
use super::experiment::{gather, pool_features, repeat_benchmark, repetition_seed};
use super::label::material;
use super::train::FitParams;
use super::{kept_path, load_labeled, required, sibling};
use crate::error::{PipelineError, Result};
use crate::formats::csvio::{self, curve_records, LabelRecord};
use crate::formats::mksm::Mksm;
use crate::formats::{mksd, write_atomic};
use crate::manifest::RunRecorder;

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AlArgs {
    /// PCA artifact; its scored cells form the candidate pool.
    #[arg(long)]
    pub pca: Option<PathBuf>,
    /// Labels CSV (benchmark mode).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub kept: Option<PathBuf>,
    /// Label queried cells with the solver instead of looking them up.
    #[arg(long)]
    pub oracle: bool,
    /// Cells for oracle mode (MKSD).
    #[arg(long)]
    pub cells: Option<PathBuf>,
    /// Oracle mode: stop on the relative change of the max pool std.
    #[arg(long)]
    pub std_stop: bool,
    #[arg(long)]
    pub n_components: Option<usize>,
    #[arg(long)]
    pub n_init: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub refit_restarts: Option<usize>,
    #[arg(long)]
    pub refit_iters: Option<usize>,
    /// Re-optimize hyperparameters after every k labels.
    #[arg(long)]
    pub refit_every: Option<usize>,
    /// Re-optimize whenever the labeled set grew by this factor.
    #[arg(long, conflicts_with = "refit_every")]
    pub refit_geometric: Option<f64>,
    #[arg(long)]
    pub optimize_subsample: Option<usize>,
    /// Re-standardize the scores on the labeled set every iteration.
    #[arg(long)]
    pub labeled_refresh: bool,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub filter_threshold: Option<f64>,
    /// Learning curves CSV; aggregate and summary files go next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
struct AlParams {
    mode: &'static str,
    n_components: usize,
    n_init: usize,
    window: usize,
    epsilon: f64,
    budget: usize,
    reps: usize,
    initial_fit: FitParams,
    refit: FitParams,
    refit_schedule: String,
    scaling: &'static str,
    std_stop: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub iter: usize,
    pub mean_n_labeled: f64,
    pub mean_pool_mae: Option<f64>,
    pub std_pool_mae: Option<f64>,
    pub mean_max_pool_std: f64,
    pub std_max_pool_std: f64,
    pub padded: usize,
}

impl From<&AggregateRow> for AggregateRecord {
    fn from(r: &AggregateRow) -> Self {
        Self {
            iter: r.iteration,
            mean_n_labeled: r.mean_n_labeled,
            mean_pool_mae: r.mean_pool_mae,
            std_pool_mae: r.std_pool_mae,
            mean_max_pool_std: r.mean_max_std,
            std_max_pool_std: r.std_max_std,
            padded: r.padded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSummary {
    pub rep: usize,
    pub seed: u64,
    pub n_labeled: usize,
    pub stopped_by_rule: bool,
    pub final_pool_mae: Option<f64>,
    pub initial_max_pool_std: f64,
    pub final_max_pool_std: f64,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlSummary {
    pub repetitions: Vec<RepetitionSummary>,
    pub stopped_by_rule: usize,
    pub mean_n_labeled: f64,
    pub mean_final_pool_mae: Option<f64>,
}

pub fn summarize(curves: &[LearningCurve]) -> AlSummary {
    let repetitions: Vec<RepetitionSummary> = curves
        .iter()
        .map(|c| RepetitionSummary {
            rep: c.repetition,
            seed: c.seed,
            n_labeled: c.final_row().n_labeled,
            stopped_by_rule: c.stopped_by_rule(),
            final_pool_mae: c.final_row().pool_mae,
            initial_max_pool_std: c.rows[0].max_pool_std,
            final_max_pool_std: c.final_row().max_pool_std,
            skipped: c.skipped.len(),
        })
        .collect();
    let n = repetitions.len() as f64;
    let maes: Option<Vec<f64>> = repetitions.iter().map(|r| r.final_pool_mae).collect();
    AlSummary {
        stopped_by_rule: repetitions.iter().filter(|r| r.stopped_by_rule).count(),
        mean_n_labeled: repetitions.iter().map(|r| r.n_labeled as f64).sum::<f64>() / n,
        mean_final_pool_mae: maes.map(|m| m.iter().sum::<f64>() / n),
        repetitions,
    }
}

/// Replaces pool positions by cell indices in every curve.
fn to_cell_indices(curves: &mut [LearningCurve], pool: &[usize]) {
    for c in curves {
        for r in &mut c.rows {
            r.chosen_index = r.chosen_index.map(|p| pool[p]);
        }
        c.skipped.iter_mut().for_each(|p| *p = pool[*p]);
        c.labeled.iter_mut().for_each(|p| *p = pool[*p]);
    }
}

pub fn run(args: &AlArgs, seed: u64) -> Result<AlSummary> {
    let pca_path = required(args.pca.clone(), "pca")?;
    let out = required(args.out.clone(), "out")?;
    let rule = StopRule {
        window: args.window.unwrap_or(5),
        epsilon: args.epsilon.unwrap_or(1e-4),
        budget: args.budget.unwrap_or(600),
    };
    let initial_fit = FitParams::resolve(args.restarts, args.iters, args.learning_rate, None, args.optimize_subsample)?;
    let refit = FitParams::resolve(
        Some(args.refit_restarts.unwrap_or(2)),
        args.refit_iters.or(args.iters),
        args.learning_rate,
        None,
        args.optimize_subsample,
    )?;
    let refit_schedule = match (args.refit_every, args.refit_geometric) {
        (_, Some(r)) if r > 1.0 => RefitSchedule::Geometric(r),
        (_, Some(r)) => return Err(PipelineError::Argument(format!("--refit-geometric must exceed 1, got {r}"))),
        (Some(0), None) => return Err(PipelineError::Argument("--refit-every must be at least 1".into())),
        (k, None) => RefitSchedule::Every(k.unwrap_or(1)),
    };
    let scaling = if args.labeled_refresh { Scaling::LabeledRefresh } else { Scaling::AsGiven };
    let n_components = args.n_components.unwrap_or(6);
    let reps = args.reps.unwrap_or(10);
    let config = ActiveConfig {
        n_init: args.n_init.unwrap_or(10),
        rule,
        initial_fit: initial_fit.config(),
        refit: refit.config(),
        refit_schedule,
        scaling,
        oracle_std_stop: args.std_stop,
    };
    config.rule.validate(config.n_init)?;
    let params = AlParams {
        mode: if args.oracle { "oracle" } else { "benchmark" },
        n_components,
        n_init: config.n_init,
        window: rule.window,
        epsilon: rule.epsilon,
        budget: rule.budget,
        reps,
        initial_fit,
        refit,
        refit_schedule: format!("{refit_schedule:?}"),
        scaling: if args.labeled_refresh { "labeled-refresh" } else { "ensemble" },
        std_stop: args.std_stop,
    };
    let mut rec = RunRecorder::new("al", Some(seed), &params);
    rec.input("pca", &pca_path)?;
    let (_, scores) = pca_from_mksm(&Mksm::read(&pca_path, PCA_KIND, "pca")?, &pca_path)?;

    let (mut curves, pool) = if args.oracle {
        let cells_path = required(args.cells.clone(), "cells")?;
        rec.input("cells", &cells_path)?;
        let cells = mksd::read(&cells_path)?;
        if cells.len() != scores.rows() {
            return Err(PipelineError::Argument(format!(
                "{} cells but {} scored rows in the PCA artifact",
                cells.len(),
                scores.rows()
            )));
        }
        let d = LabelConfig::default();
        let label_config = LabelConfig {
            tol: args.tol.unwrap_or(d.tol),
            beta: args.beta.unwrap_or(d.beta),
            filter_threshold: args.filter_threshold.unwrap_or(d.filter_threshold),
            max_iter: None,
        };
        let material = material(None, None)?;
        let pool: Vec<usize> = (0..cells.len()).collect();
        let features = pool_features(&scores, &pool, n_components, scaling)?;
        let mut solved: BTreeMap<usize, std::result::Result<LabelRecord, String>> = BTreeMap::new();
        let mut solver = None;
        let mut curves = Vec::with_capacity(reps);
        rec.time("loop", || -> Result<()> {
            for rep in 0..reps {
                let mut oracle = |i: usize| -> metamat_core::Result<f64> {
                    let entry = solved.entry(i).or_insert_with(|| {
                        label_cell(&mut solver, i, &cells[i], &material, &label_config)
                            .map(|l| LabelRecord::from(&l))
                            .map_err(|e| e.to_string())
                    });
                    match entry {
                        Ok(l) if l.normalized_c11 >= label_config.filter_threshold => Ok(l.normalized_c11),
                        Ok(l) => Err(CoreError::State(format!("cell {i} below the filter ({})", l.normalized_c11))),
                        Err(e) => Err(CoreError::Numerical(e.clone())),
                    }
                };
                let (mut curve, _) =
                    run_loop(&features, Labels::Oracle(&mut oracle), &config, repetition_seed(seed, rep))?;
                curve.repetition = rep;
                for i in &curve.skipped {
                    log::warn!("repetition {rep}: skipped cell {i}");
                }
                curves.push(curve);
            }
            Ok(())
        })?;
        let records: Vec<LabelRecord> = solved.into_values().filter_map(|r| r.ok()).collect();
        let labels_out = sibling(&out, "labels");
        csvio::write_labels(&labels_out, &records)?;
        rec.output("oracle-labels", &labels_out)?;
        (curves, pool)
    } else {
        let labels_path = required(args.labels.clone(), "labels")?;
        let kept = args.kept.clone().unwrap_or_else(|| kept_path(&labels_path));
        rec.input("labels", &labels_path)?;
        rec.input("kept", &kept)?;
        let data = load_labeled(&labels_path, &kept, scores.rows())?;
        let features = pool_features(&scores, &data.kept, n_components, scaling)?;
        let y = gather(&data.y, &data.kept)?;
        let (curves, _) = rec.time("loop", || repeat_benchmark(&features, &y, &config, reps, seed))?;
        (curves, data.kept)
    };
    to_cell_indices(&mut curves, &pool);

    csvio::write_records(&out, &curve_records(&curves))?;
    let aggregate: Vec<AggregateRecord> = aggregate_curves(&curves).iter().map(AggregateRecord::from).collect();
    let aggregate_path = sibling(&out, "aggregate");
    csvio::write_records(&aggregate_path, &aggregate)?;
    let summary = summarize(&curves);
    let summary_path = sibling(&out, "summary").with_extension("json");
    let mut json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    json.push(b'\n');
    write_atomic(&summary_path, &json)?;
    log::info!(
        "{} of {} repetitions stopped by the rule; mean labeled {:.1}",
        summary.stopped_by_rule,
        reps,
        summary.mean_n_labeled
    );
    rec.output("curves", &out)?;
    rec.output("aggregate", &aggregate_path)?;
    rec.output("summary", &summary_path)?;
    rec.write(&out)?;
    Ok(summary)
}
