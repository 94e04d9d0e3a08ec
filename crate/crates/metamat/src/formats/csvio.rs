//! CSV artifacts: labels, kept indices, learning curves and plot tables.

use std::path::Path;

use metamat_core::active::LearningCurve;
use metamat_core::homogenize::CellLabel;
use serde::{Deserialize, Serialize};

use super::{read_artifact, write_atomic};
use crate::error::{PipelineError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub index: usize,
    pub normalized_c11: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl From<&CellLabel> for LabelRecord {
    fn from(l: &CellLabel) -> Self {
        Self {
            index: l.index,
            normalized_c11: l.normalized_c11,
            converged: l.converged,
            iterations: l.iterations,
            residual: l.residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub rep: usize,
    pub iter: usize,
    pub n_labeled: usize,
    pub pool_mae: Option<f64>,
    pub max_pool_std: f64,
    pub chosen_index: Option<usize>,
    pub stopped: bool,
}

fn csv_error(path: &Path, e: csv::Error) -> PipelineError {
    let line = e.position().map(|p| format!("line {}: ", p.line())).unwrap_or_default();
    PipelineError::format(path, format!("{line}{e}"))
}

/// Serializes records with a header row.
pub fn to_csv_bytes<T: Serialize>(records: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| PipelineError::Argument(e.to_string()))?;
    }
    w.into_inner().map_err(|e| PipelineError::Argument(e.to_string()))
}

pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    write_atomic(path, &to_csv_bytes(records)?)
}

pub fn parse_records<T: for<'de> Deserialize<'de>>(bytes: &[u8], path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(bytes);
    r.deserialize().map(|rec| rec.map_err(|e| csv_error(path, e))).collect()
}

pub fn read_records<T: for<'de> Deserialize<'de>>(path: &Path, producer: &str) -> Result<Vec<T>> {
    parse_records(&read_artifact(path, producer)?, path)
}

/// Writes a table with explicit column names and numeric rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| PipelineError::Argument(e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| PipelineError::Argument(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::Argument(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Reads a numeric table; returns the header and the rows.
pub fn read_table(path: &Path, producer: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let bytes = read_artifact(path, producer)?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = r.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = rec
            .iter()
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    PipelineError::format(path, format!("line {}: '{v}' is not a number", line + 2))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[derive(Serialize, Deserialize)]
struct IndexRecord {
    index: usize,
}

pub fn write_indices(path: &Path, indices: &[usize]) -> Result<()> {
    let rows: Vec<IndexRecord> = indices.iter().map(|&index| IndexRecord { index }).collect();
    write_records(path, &rows)
}

pub fn read_indices(path: &Path, producer: &str) -> Result<Vec<usize>> {
    Ok(read_records::<IndexRecord>(path, producer)?.into_iter().map(|r| r.index).collect())
}

pub fn write_labels(path: &Path, labels: &[LabelRecord]) -> Result<()> {
    write_records(path, labels)
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelRecord>> {
    read_records(path, "label")
}

pub fn curve_records(curves: &[LearningCurve]) -> Vec<CurveRecord> {
    curves
        .iter()
        .flat_map(|c| {
            c.rows.iter().map(move |r| CurveRecord {
                rep: c.repetition,
                iter: r.iteration,
                n_labeled: r.n_labeled,
                pool_mae: r.pool_mae,
                max_pool_std: r.max_pool_std,
                chosen_index: r.chosen_index,
                stopped: r.stopped,
            })
        })
        .collect()
}
