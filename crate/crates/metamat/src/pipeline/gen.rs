use std::path::PathBuf;

use clap::Args;
use metamat_core::geometry::{generate_dataset, GenConfig};
use metamat_core::seed::derive_seed;
use serde::{Deserialize, Serialize};

use super::required;
use crate::error::Result;
use crate::formats::mksd;
use crate::manifest::RunRecorder;

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GenArgs {
    /// Number of accepted cells.
    #[arg(long)]
    pub count: Option<usize>,
    /// Output MKSD file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Edge length of the square tile before mirroring.
    #[arg(long)]
    pub tile: Option<usize>,
    #[arg(long)]
    pub correlation_length: Option<f64>,
    #[arg(long)]
    pub density_min: Option<f64>,
    #[arg(long)]
    pub density_max: Option<f64>,
    #[arg(long)]
    pub min_boundary_fraction: Option<f64>,
    /// Accept cells whose solid phase is not a single connected component.
    #[arg(long)]
    pub allow_disconnected: bool,
}

#[derive(Clone, Debug, Serialize)]
struct GenParams {
    count: usize,
    tile: usize,
    correlation_length: f64,
    density_band: (f64, f64),
    min_boundary_fraction: f64,
    require_connected: bool,
    acceptance_floor: f64,
    min_trials: usize,
}

pub fn run(args: &GenArgs, seed: u64) -> Result<PathBuf> {
    let out = required(args.out.clone(), "out")?;
    let d = GenConfig::default();
    let tile = args.tile.unwrap_or(d.tile_width);
    let config = GenConfig {
        tile_width: tile,
        tile_height: tile,
        correlation_length: args.correlation_length.unwrap_or(d.correlation_length),
        density_band: (args.density_min.unwrap_or(d.density_band.0), args.density_max.unwrap_or(d.density_band.1)),
        min_boundary_fraction: args.min_boundary_fraction.unwrap_or(d.min_boundary_fraction),
        require_connected: !args.allow_disconnected,
        ..d
    };
    let params = GenParams {
        count: required(args.count, "count")?,
        tile,
        correlation_length: config.correlation_length,
        density_band: config.density_band,
        min_boundary_fraction: config.min_boundary_fraction,
        require_connected: config.require_connected,
        acceptance_floor: config.acceptance_floor,
        min_trials: config.min_trials,
    };
    let mut rec = RunRecorder::new("gen", Some(seed), &params);
    let cells = rec.time("generate", || generate_dataset(params.count, derive_seed(seed, "gen"), &config))?;
    rec.time("write", || mksd::write(&out, &cells))?;
    rec.output("cells", &out)?;
    log::info!("wrote {} cells to {}", cells.len(), out.display());
    rec.write(&out)?;
    Ok(out)
}
