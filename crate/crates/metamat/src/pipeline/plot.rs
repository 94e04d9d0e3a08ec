use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use metamat_core::geometry::volume_fraction;
use serde::{Deserialize, Serialize};

use super::artifacts::{pca_from_mksm, PCA_KIND};
use super::eval::ParityRecord;
use super::required;
use crate::error::{PipelineError, Result};
use crate::formats::csvio::{self, CurveRecord};
use crate::formats::mksm::Mksm;
use crate::formats::{mksd, write_atomic};
use crate::manifest::RunRecorder;
use crate::plot::{render, Chart, Series, Style};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    PcScatter,
    Parity,
    LearningCurve,
    StdCurve,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorBy {
    #[default]
    VolumeFraction,
    C11,
    None,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: Option<PlotKind>,
    /// Parity CSV (`parity`) or learning curves CSV (`learning-curve`, `std-curve`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// PCA artifact (`pc-scatter`).
    #[arg(long)]
    pub pca: Option<PathBuf>,
    /// Cells for volume-fraction coloring.
    #[arg(long)]
    pub cells: Option<PathBuf>,
    /// Labels for C11 coloring.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub color: Option<ColorBy>,
    /// Output SVG; the backing CSV is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ScatterRow {
    pc1: f64,
    pc2: f64,
    color_value: Option<f64>,
}

#[derive(Serialize)]
struct ParityRow {
    y_true: f64,
    y_pred: f64,
}

#[derive(Serialize)]
struct CurveRow {
    iter: usize,
    mean_n_labeled: f64,
    mean: f64,
    std: f64,
}

/// Mean and std across repetitions per iteration; finished repetitions carry
/// their last row forward.
fn aggregate(records: &[CurveRecord], value: impl Fn(&CurveRecord) -> Option<f64>) -> Result<Vec<CurveRow>> {
    let mut by_rep: BTreeMap<usize, Vec<&CurveRecord>> = BTreeMap::new();
    for r in records {
        by_rep.entry(r.rep).or_default().push(r);
    }
    for rows in by_rep.values_mut() {
        rows.sort_by_key(|r| r.iter);
    }
    let longest = by_rep.values().map(Vec::len).max().unwrap_or(0);
    (0..longest)
        .map(|it| {
            let rows: Vec<&CurveRecord> = by_rep.values().map(|v| v[it.min(v.len() - 1)]).collect();
            let values = rows
                .iter()
                .map(|r| value(r))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| PipelineError::Argument("the curves have no pool MAE (oracle mode)".into()))?;
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
            let mean_n_labeled = rows.iter().map(|r| r.n_labeled as f64).sum::<f64>() / n;
            Ok(CurveRow { iter: it, mean_n_labeled, mean, std })
        })
        .collect()
}

pub fn run(args: &PlotArgs) -> Result<PathBuf> {
    let kind = required(args.kind, "kind")?;
    let out = required(args.out.clone(), "out")?;
    let csv_out = out.with_extension("csv");
    let mut rec = RunRecorder::new("plot", None, &kind);
    let chart = match kind {
        PlotKind::PcScatter => {
            let pca_path = required(args.pca.clone(), "pca")?;
            rec.input("pca", &pca_path)?;
            let (_, scores) = pca_from_mksm(&Mksm::read(&pca_path, PCA_KIND, "pca")?, &pca_path)?;
            if scores.cols() < 2 {
                return Err(PipelineError::Argument("pc-scatter needs at least 2 components".into()));
            }
            let color = args.color.unwrap_or_default();
            let values: Option<Vec<f64>> = match color {
                ColorBy::None => None,
                ColorBy::VolumeFraction => {
                    let path = required(args.cells.clone(), "cells")?;
                    rec.input("cells", &path)?;
                    Some(mksd::read(&path)?.iter().map(volume_fraction).collect())
                }
                ColorBy::C11 => {
                    let path = required(args.labels.clone(), "labels")?;
                    rec.input("labels", &path)?;
                    let mut v = vec![f64::NAN; scores.rows()];
                    for r in csvio::read_labels(&path)? {
                        if let Some(slot) = v.get_mut(r.index) {
                            *slot = r.normalized_c11;
                        }
                    }
                    Some(v)
                }
            };
            if values.as_ref().is_some_and(|v| v.len() != scores.rows()) {
                return Err(PipelineError::Argument("color source and PCA scores differ in cell count".into()));
            }
            let rows: Vec<ScatterRow> = (0..scores.rows())
                .map(|i| ScatterRow { pc1: scores[(i, 0)], pc2: scores[(i, 1)], color_value: values.as_ref().map(|v| v[i]) })
                .collect();
            csvio::write_records(&csv_out, &rows)?;
            let mut s = Series::new("cells", Style::Scatter, rows.iter().map(|r| (r.pc1, r.pc2)).collect());
            s.color_values = values;
            Chart {
                title: "Principal component scores".into(),
                x_label: "PC1 score (raw)".into(),
                y_label: "PC2 score (raw)".into(),
                color_label: match color {
                    ColorBy::VolumeFraction => Some("volume fraction".into()),
                    ColorBy::C11 => Some("normalized C11".into()),
                    ColorBy::None => None,
                },
                diagonal: false,
                series: vec![s],
            }
        }
        PlotKind::Parity => {
            let input = required(args.input.clone(), "input")?;
            rec.input("parity", &input)?;
            let records: Vec<ParityRecord> = csvio::read_records(&input, "eval")?;
            let rows: Vec<ParityRow> = records.iter().map(|r| ParityRow { y_true: r.y_true, y_pred: r.y_pred }).collect();
            csvio::write_records(&csv_out, &rows)?;
            Chart {
                title: "Parity".into(),
                x_label: "true normalized C11".into(),
                y_label: "predicted normalized C11".into(),
                color_label: None,
                diagonal: true,
                series: vec![Series::new("test cells", Style::Scatter, rows.iter().map(|r| (r.y_true, r.y_pred)).collect())],
            }
        }
        PlotKind::LearningCurve | PlotKind::StdCurve => {
            let input = required(args.input.clone(), "input")?;
            rec.input("curves", &input)?;
            let records: Vec<CurveRecord> = csvio::read_records(&input, "al")?;
            let (rows, y_label) = if kind == PlotKind::LearningCurve {
                (aggregate(&records, |r| r.pool_mae)?, "pool MAE")
            } else {
                (aggregate(&records, |r| Some(r.max_pool_std))?, "max pool predictive std")
            };
            csvio::write_records(&csv_out, &rows)?;
            let mut s = Series::new("mean over repetitions", Style::Line, rows.iter().map(|r| (r.mean_n_labeled, r.mean)).collect());
            s.band = Some(rows.iter().map(|r| r.std).collect());
            Chart {
                title: if kind == PlotKind::LearningCurve { "Learning curve" } else { "Uncertainty curve" }.into(),
                x_label: "labeled cells".into(),
                y_label: y_label.into(),
                color_label: None,
                diagonal: false,
                series: vec![s],
            }
        }
    };
    write_atomic(&out, render(&chart).as_bytes())?;
    rec.output("svg", &out)?;
    rec.output("csv", &csv_out)?;
    rec.write(&out)?;
    Ok(out)
}
