//! In-memory experiment steps shared by the subcommands and the acceptance
//! suite: seeded split, standardized GPR training and evaluation, and
//! repeated active-learning runs.

use metamat_core::active::{aggregate_curves, run, ActiveConfig, AggregateRow, Labels, LearningCurve, Scaling};
use metamat_core::gpr::{fit, mae, metrics, FitConfig, FitReport, GprModel, Metrics};
use metamat_core::linalg::Matrix;
use metamat_core::seed::{derive_seed, derive_seed_index, split_fraction};
use metamat_core::statistics::Standardizer;
use rayon::prelude::*;

use crate::error::{PipelineError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSettings {
    pub n_components: usize,
    pub split: f64,
    pub fit: FitConfig,
    /// Seeded subsample of the training split used when it is larger.
    pub max_train: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: GprModel,
    pub report: FitReport,
    pub scaler: Standardizer,
    /// Cell indices used for training, ascending.
    pub train: Vec<usize>,
    /// Cell indices held out, ascending.
    pub test: Vec<usize>,
    pub test_true: Vec<f64>,
    pub test_pred: Vec<f64>,
    pub test_std: Vec<f64>,
    pub metrics: Metrics,
    /// MAE of predicting the training mean on the test split.
    pub baseline_mae: f64,
}

/// Leading `n` score columns of the given cells.
pub fn select_scores(scores: &Matrix, rows: &[usize], n: usize) -> Result<Matrix> {
    if n == 0 || n > scores.cols() {
        return Err(PipelineError::Argument(format!(
            "{n} components requested, the PCA artifact holds {}",
            scores.cols()
        )));
    }
    if let Some(&bad) = rows.iter().find(|&&i| i >= scores.rows()) {
        return Err(PipelineError::Argument(format!("cell index {bad} out of range ({} cells)", scores.rows())));
    }
    Ok(scores.select_rows(rows).leading_columns(n))
}

pub fn gather(y: &[f64], rows: &[usize]) -> Result<Vec<f64>> {
    rows.iter()
        .map(|&i| match y.get(i) {
            Some(v) if v.is_finite() => Ok(*v),
            _ => Err(PipelineError::Argument(format!("cell {i} has no label"))),
        })
        .collect()
}

/// Seeded train/test split of the kept cells.
pub fn split_kept(kept: &[usize], settings: &TrainSettings, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let (mut train, test) = split_fraction(kept, settings.split, derive_seed(seed, "split"));
    if let Some(m) = settings.max_train.filter(|&m| m < train.len()) {
        train = split_fraction(&train, m as f64 / train.len() as f64, derive_seed(seed, "train-subsample")).0;
    }
    (train, test)
}

/// Fits a GPR on standardized scores of the training cells.
pub fn train_only(
    scores: &Matrix,
    y: &[f64],
    train: &[usize],
    settings: &TrainSettings,
    seed: u64,
) -> Result<(GprModel, FitReport, Standardizer)> {
    let x_raw = select_scores(scores, train, settings.n_components)?;
    let scaler = Standardizer::fit(&x_raw)?;
    let x = scaler.apply(&x_raw)?;
    let y_train = gather(y, train)?;
    let config = FitConfig { seed: derive_seed(seed, "fit"), ..settings.fit.clone() };
    let (model, report) = fit(&x, &y_train, &config)?;
    Ok((model, report, scaler))
}

pub fn predict_cells(
    model: &GprModel,
    scaler: &Standardizer,
    scores: &Matrix,
    rows: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = scaler.apply(&select_scores(scores, rows, scaler.dim())?)?;
    let (mean, var) = model.predict(&x)?;
    Ok((mean, var.into_iter().map(|v| v.max(0.0).sqrt()).collect()))
}

/// Split, train and score on the held-out cells.
pub fn train_eval(
    scores: &Matrix,
    y: &[f64],
    kept: &[usize],
    settings: &TrainSettings,
    seed: u64,
) -> Result<TrainOutcome> {
    let (train, test) = split_kept(kept, settings, seed);
    if train.len() < 2 || test.is_empty() {
        return Err(PipelineError::Argument(format!(
            "split of {} kept cells leaves {} train / {} test",
            kept.len(),
            train.len(),
            test.len()
        )));
    }
    let (model, report, scaler) = train_only(scores, y, &train, settings, seed)?;
    let (test_pred, test_std) = predict_cells(&model, &scaler, scores, &test)?;
    let test_true = gather(y, &test)?;
    let metrics = metrics(&test_true, &test_pred)?;
    let y_train = gather(y, &train)?;
    let train_mean = y_train.iter().sum::<f64>() / y_train.len() as f64;
    let baseline_mae = mae(&test_true, &vec![train_mean; test_true.len()])?;
    Ok(TrainOutcome { model, report, scaler, train, test, test_true, test_pred, test_std, metrics, baseline_mae })
}

/// Candidate features for pool-based runs: the leading score columns of the
/// pool cells, standardized over the pool unless the labeled set is
/// re-standardized during the run.
pub fn pool_features(scores: &Matrix, pool: &[usize], n_components: usize, scaling: Scaling) -> Result<Matrix> {
    let x = select_scores(scores, pool, n_components)?;
    match scaling {
        Scaling::AsGiven => Ok(Standardizer::fit(&x)?.apply(&x)?),
        Scaling::LabeledRefresh => Ok(x),
    }
}

/// Seed of repetition `rep`.
pub fn repetition_seed(seed: u64, rep: usize) -> u64 {
    derive_seed_index(derive_seed(seed, "al"), rep as u64)
}

/// Benchmark-mode repetitions in parallel; output order follows `rep`.
pub fn repeat_benchmark(
    features: &Matrix,
    y: &[f64],
    config: &ActiveConfig,
    reps: usize,
    seed: u64,
) -> Result<(Vec<LearningCurve>, Vec<AggregateRow>)> {
    if reps == 0 {
        return Err(PipelineError::Argument("--reps must be at least 1".into()));
    }
    let curves = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (mut curve, _) = run(features, Labels::Known(y), config, repetition_seed(seed, rep))?;
            curve.repetition = rep;
            log::info!(
                "repetition {rep}: {} labeled, stopped by rule: {}",
                curve.final_row().n_labeled,
                curve.stopped_by_rule()
            );
            Ok(curve)
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate_curves(&curves);
    Ok((curves, aggregate))
}
