use std::path::{Path, PathBuf};

use clap::Args;
use metamat_core::linalg::Matrix;
use metamat_core::statistics::Combination;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::artifacts::{combination_of, pca_from_mksm, PCA_KIND};
use super::experiment::{train_eval, TrainSettings};
use super::train::FitParams;
use super::{check_fraction, kept_path, load_labeled, required, sibling, LabeledSet};
use crate::error::{PipelineError, Result};
use crate::formats::mksm::Mksm;
use crate::formats::{csvio, write_atomic};
use crate::manifest::RunRecorder;

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepArgs {
    /// PCA artifacts, one per correlation combination.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub pca: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub kept: Option<PathBuf>,
    /// Component counts to train with.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub components: Option<Vec<usize>>,
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_exact_n: Option<usize>,
    #[arg(long)]
    pub optimize_subsample: Option<usize>,
    #[arg(long)]
    pub train_subsample: Option<usize>,
    /// Output MAE table (CSV); a JSON summary is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub combination: String,
    pub n_components: usize,
    pub mae: Option<f64>,
    pub r2: Option<f64>,
    pub nmae: Option<f64>,
    pub baseline_mae: Option<f64>,
    pub nlml: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub combination: String,
    /// Whether MAE never increases from 1 up to 6 components.
    pub non_increasing_to_6: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub failures: usize,
    pub trends: Vec<TrendCheck>,
    /// Relative MAE reduction of `si` over `s` at 6 components.
    pub si_gain_at_6: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
struct SweepParams {
    combinations: Vec<String>,
    components: Vec<usize>,
    split: f64,
    train_subsample: Option<usize>,
    fit: FitParams,
}

/// Trains every (combination, component count) model on the same split.
pub fn sweep_models(
    inputs: &[(Combination, Matrix)],
    data: &LabeledSet,
    components: &[usize],
    settings: &TrainSettings,
    seed: u64,
) -> Vec<SweepRow> {
    let jobs: Vec<(usize, usize)> =
        (0..inputs.len()).flat_map(|c| components.iter().map(move |&n| (c, n))).collect();
    jobs.par_iter()
        .map(|&(c, n)| {
            let (combination, scores) = &inputs[c];
            let settings = TrainSettings { n_components: n, ..settings.clone() };
            let outcome = train_eval(scores, &data.y, &data.kept, &settings, seed);
            let tag = combination.tag().to_string();
            match outcome {
                Ok(o) => SweepRow {
                    combination: tag,
                    n_components: n,
                    mae: Some(o.metrics.mae),
                    r2: Some(o.metrics.r2),
                    nmae: Some(o.metrics.nmae),
                    baseline_mae: Some(o.baseline_mae),
                    nlml: Some(o.report.nlml),
                    n_train: o.train.len(),
                    n_test: o.test.len(),
                    status: "ok".into(),
                },
                Err(e) => {
                    log::warn!("{tag} with {n} components failed: {e}");
                    SweepRow {
                        combination: tag,
                        n_components: n,
                        mae: None,
                        r2: None,
                        nmae: None,
                        baseline_mae: None,
                        nlml: None,
                        n_train: 0,
                        n_test: 0,
                        status: format!("failed: {e}"),
                    }
                }
            }
        })
        .collect()
}

fn mae_at(rows: &[SweepRow], tag: &str, n: usize) -> Option<f64> {
    rows.iter().find(|r| r.combination == tag && r.n_components == n).and_then(|r| r.mae)
}

pub fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let mut tags: Vec<&str> = rows.iter().map(|r| r.combination.as_str()).collect();
    tags.dedup();
    let trends = tags
        .iter()
        .map(|&tag| {
            let series: Option<Vec<f64>> = (1..=6).map(|n| mae_at(rows, tag, n)).collect();
            TrendCheck {
                combination: tag.to_string(),
                non_increasing_to_6: series.map(|s| s.windows(2).all(|w| w[1] <= w[0])),
            }
        })
        .collect();
    let si_gain_at_6 = match (mae_at(rows, "s", 6), mae_at(rows, "si", 6)) {
        (Some(s), Some(si)) => Some((s - si) / s),
        _ => None,
    };
    SweepSummary {
        rows: rows.len(),
        failures: rows.iter().filter(|r| r.status != "ok").count(),
        trends,
        si_gain_at_6,
    }
}

fn load_scores(path: &Path) -> Result<(Combination, Matrix)> {
    let container = Mksm::read(path, PCA_KIND, "pca")?;
    Ok((combination_of(&container)?, pca_from_mksm(&container, path)?.1))
}

pub fn run(args: &SweepArgs, seed: u64) -> Result<SweepSummary> {
    let pca_paths = required(args.pca.clone(), "pca")?;
    let labels_path = required(args.labels.clone(), "labels")?;
    let kept = args.kept.clone().unwrap_or_else(|| kept_path(&labels_path));
    let out = required(args.out.clone(), "out")?;
    let components = args.components.clone().unwrap_or_else(|| (1..=8).collect());
    if components.is_empty() || components.contains(&0) {
        return Err(PipelineError::Argument("--components must list positive counts".into()));
    }
    let split = check_fraction(args.split.unwrap_or(0.8), "split")?;
    let fit = FitParams::resolve(args.restarts, args.iters, args.learning_rate, args.max_exact_n, args.optimize_subsample)?;

    let inputs = pca_paths.iter().map(|p| load_scores(p)).collect::<Result<Vec<_>>>()?;
    let n_cells = inputs[0].1.rows();
    if let Some(p) = inputs.iter().position(|(_, s)| s.rows() != n_cells) {
        return Err(PipelineError::Argument(format!("'{}' scores a different number of cells", pca_paths[p].display())));
    }
    let params = SweepParams {
        combinations: inputs.iter().map(|(c, _)| c.tag().to_string()).collect(),
        components: components.clone(),
        split,
        train_subsample: args.train_subsample,
        fit,
    };
    let mut rec = RunRecorder::new("sweep", Some(seed), &params);
    for (p, (c, _)) in pca_paths.iter().zip(&inputs) {
        rec.input(&format!("pca-{}", c.tag()), p)?;
    }
    rec.input("labels", &labels_path)?;
    rec.input("kept", &kept)?;
    let data = load_labeled(&labels_path, &kept, n_cells)?;
    let settings = TrainSettings { n_components: 1, split, fit: params.fit.config(), max_train: args.train_subsample };
    let rows = rec.time("train", || sweep_models(&inputs, &data, &components, &settings, seed));
    let summary = summarize(&rows);
    for t in &summary.trends {
        log::info!("{}: MAE non-increasing from 1 to 6 components: {:?}", t.combination, t.non_increasing_to_6);
    }
    csvio::write_records(&out, &rows)?;
    let summary_path = sibling(&out, "summary").with_extension("json");
    let mut json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    json.push(b'\n');
    write_atomic(&summary_path, &json)?;
    rec.output("table", &out)?;
    rec.output("summary", &summary_path)?;
    rec.write(&out)?;
    Ok(summary)
}
