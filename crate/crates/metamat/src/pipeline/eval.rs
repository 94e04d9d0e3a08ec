use std::path::PathBuf;

use clap::{Args, ValueEnum};
use metamat_core::gpr::{mae, metrics};
use serde::{Deserialize, Serialize};

use super::artifacts::{gpr_from_mksm, pca_from_mksm, GPR_KIND, PCA_KIND};
use super::experiment::{gather, predict_cells};
use super::{kept_path, load_labeled, required, sibling};
use crate::error::{PipelineError, Result};
use crate::formats::csvio;
use crate::formats::mksm::Mksm;
use crate::formats::write_atomic;
use crate::manifest::{read_manifest, verify_input, RunRecorder};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalSet {
    #[default]
    Test,
    Train,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EvalArgs {
    /// Model written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub pca: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub kept: Option<PathBuf>,
    /// Cells to evaluate on.
    #[arg(long, value_enum)]
    pub on: Option<EvalSet>,
    /// Parity CSV; the metrics report is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ParityRecord {
    pub index: usize,
    pub y_true: f64,
    pub y_pred: f64,
    pub pred_std: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EvalReport {
    pub on: EvalSet,
    pub n: usize,
    pub mae: f64,
    pub r2: Option<f64>,
    pub nmae: Option<f64>,
    /// MAE of predicting the training mean.
    pub baseline_mae: f64,
}

pub fn run(args: &EvalArgs) -> Result<EvalReport> {
    let model_path = required(args.model.clone(), "model")?;
    let pca_path = required(args.pca.clone(), "pca")?;
    let labels_path = required(args.labels.clone(), "labels")?;
    let kept = args.kept.clone().unwrap_or_else(|| kept_path(&labels_path));
    let out = required(args.out.clone(), "out")?;
    let on = args.on.unwrap_or_default();

    let trained = read_manifest(&model_path, "train")?;
    verify_input(&trained, "pca", &pca_path)?;
    verify_input(&trained, "labels", &labels_path)?;
    verify_input(&trained, "kept", &kept)?;

    let mut rec = RunRecorder::new("eval", None, &on);
    rec.input("model", &model_path)?;
    rec.input("pca", &pca_path)?;
    rec.input("labels", &labels_path)?;
    rec.input("kept", &kept)?;
    let stored = gpr_from_mksm(&Mksm::read(&model_path, GPR_KIND, "train")?, &model_path)?;
    let container = Mksm::read(&pca_path, PCA_KIND, "pca")?;
    let (_, scores) = pca_from_mksm(&container, &pca_path)?;
    let data = load_labeled(&labels_path, &kept, scores.rows())?;
    let rows = match on {
        EvalSet::Test => &stored.test,
        EvalSet::Train => &stored.train,
    };
    if rows.is_empty() {
        return Err(PipelineError::Argument(format!("the model has no {on:?} cells")));
    }
    let (pred, std) = rec.time("predict", || predict_cells(&stored.model, &stored.scaler, &scores, rows))?;
    let truth = gather(&data.y, rows)?;
    let y_train = gather(&data.y, &stored.train)?;
    let train_mean = y_train.iter().sum::<f64>() / y_train.len() as f64;
    let m = metrics(&truth, &pred).ok();
    let report = EvalReport {
        on,
        n: rows.len(),
        mae: mae(&truth, &pred)?,
        r2: m.map(|m| m.r2),
        nmae: m.map(|m| m.nmae),
        baseline_mae: mae(&truth, &vec![train_mean; truth.len()])?,
    };
    let parity: Vec<ParityRecord> = rows
        .iter()
        .zip(truth.iter().zip(pred.iter().zip(&std)))
        .map(|(&index, (&y_true, (&y_pred, &pred_std)))| ParityRecord { index, y_true, y_pred, pred_std })
        .collect();
    csvio::write_records(&out, &parity)?;
    let report_path = sibling(&out, "report").with_extension("json");
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    write_atomic(&report_path, &json)?;
    log::info!("MAE {:.6} on {} {:?} cells (baseline {:.6})", report.mae, report.n, on, report.baseline_mae);
    rec.output("parity", &out)?;
    rec.output("report", &report_path)?;
    rec.write(&out)?;
    Ok(report)
}
