use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use metamat_core::homogenize::Material;
use serde::{Deserialize, Serialize};

use super::{kept_path, required};
use crate::error::{PipelineError, Result};
use crate::formats::csvio::{self, LabelRecord};
use crate::formats::npy::listing_error;
use crate::formats::{mksd, npy, read_artifact};
use crate::manifest::RunRecorder;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportFormat {
    NpyCells,
    CsvLabels,
    Mksd,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ImportArgs {
    #[arg(long, value_enum)]
    pub format: Option<ImportFormat>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Native output: MKSD for cells, labels CSV for labels.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cell edge length expected in NPY input.
    #[arg(long)]
    pub size: Option<usize>,
    /// Labels below this value are left out of the kept list.
    #[arg(long)]
    pub filter_threshold: Option<f64>,
}

const LABEL_COLUMNS: [&str; 5] = ["normalized_c11", "c11", "C11", "label", "y"];

/// Largest admissible normalized label: the all-solid value for the default
/// material.
pub fn label_upper_bound() -> f64 {
    let m = Material::default();
    (m.lame_lambda() + 2.0 * m.lame_mu()) / m.youngs_modulus
}

/// Parses external label tables: a label column (`normalized_c11`, `c11`,
/// `label` or `y`, or the only column) and an optional `index` column.
pub fn parse_label_table(bytes: &[u8], path: &Path) -> Result<Vec<LabelRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| PipelineError::format(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let value_col = LABEL_COLUMNS
        .iter()
        .find_map(|name| header.iter().position(|h| h == name))
        .or(if header.len() == 1 { Some(0) } else { None })
        .ok_or_else(|| PipelineError::format(path, format!("no label column among {header:?}")))?;
    let index_col = header.iter().position(|h| h == "index");
    let upper = label_upper_bound() + 1e-9;
    let mut records = Vec::new();
    let mut problems = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| PipelineError::format(path, e.to_string()))?;
        let index = match index_col {
            Some(c) => match rec.get(c).and_then(|v| v.parse::<usize>().ok()) {
                Some(i) => i,
                None => {
                    problems.push(format!("row {row}: bad index {:?}", rec.get(c).unwrap_or("")));
                    continue;
                }
            },
            None => row,
        };
        match rec.get(value_col).and_then(|v| v.parse::<f64>().ok()) {
            Some(v) if (0.0..=upper).contains(&v) => records.push(LabelRecord {
                index,
                normalized_c11: v,
                converged: true,
                iterations: 0,
                residual: 0.0,
            }),
            _ => problems.push(format!("row {row}: label {:?} outside [0, {upper:.7}]", rec.get(value_col).unwrap_or(""))),
        }
    }
    if !problems.is_empty() {
        return Err(listing_error(path, "invalid label records", &problems));
    }
    let mut seen = records.iter().map(|r| r.index).collect::<Vec<_>>();
    seen.sort_unstable();
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return Err(PipelineError::format(path, format!("duplicate index {}", w[0])));
    }
    Ok(records)
}

#[derive(Clone, Debug, Serialize)]
struct ImportParams {
    format: ImportFormat,
    size: usize,
    filter_threshold: f64,
}

pub fn run(args: &ImportArgs) -> Result<PathBuf> {
    let format = required(args.format, "format")?;
    let input = required(args.input.clone(), "input")?;
    let out = required(args.out.clone(), "out")?;
    let params = ImportParams {
        format,
        size: args.size.unwrap_or(96),
        filter_threshold: args.filter_threshold.unwrap_or(0.01),
    };
    let mut rec = RunRecorder::new("import", None, &params);
    rec.input("source", &input)?;
    match format {
        ImportFormat::NpyCells => {
            let cells = npy::read(&input, params.size)?;
            mksd::write(&out, &cells)?;
            log::info!("imported {} cells", cells.len());
            rec.output("cells", &out)?;
        }
        ImportFormat::Mksd => {
            let cells = mksd::decode(&read_artifact(&input, "import")?, &input)?;
            mksd::write(&out, &cells)?;
            rec.output("cells", &out)?;
        }
        ImportFormat::CsvLabels => {
            let mut records = parse_label_table(&read_artifact(&input, "import")?, &input)?;
            records.sort_by_key(|r| r.index);
            let kept: Vec<usize> =
                records.iter().filter(|r| r.normalized_c11 >= params.filter_threshold).map(|r| r.index).collect();
            let kept_out = kept_path(&out);
            csvio::write_labels(&out, &records)?;
            csvio::write_indices(&kept_out, &kept)?;
            log::info!("imported {} labels, {} kept", records.len(), kept.len());
            rec.output("labels", &out)?;
            rec.output("kept", &kept_out)?;
        }
    }
    rec.write(&out)?;
    Ok(out)
}
