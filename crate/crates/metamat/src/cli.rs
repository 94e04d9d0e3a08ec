//! Command-line front end.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::FileConfig;
use crate::error::Result;
use crate::pipeline::{al, eval, features, gen, import, label, pca, plot, sweep, train};

#[derive(Parser, Debug)]
#[command(name = "metamat", version, about = "Metamaterial structure-property pipeline")]
pub struct Cli {
    /// Sectioned configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed from which every stage seed is derived.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate periodic unit cells (MKSD).
    Gen(gen::GenArgs),
    /// Label cells with the homogenized C11 (labels CSV).
    Label(label::LabelArgs),
    /// Fit the correlation rescaling for a combination (MKSM).
    Features(features::FeaturesArgs),
    /// Fit PCA on rescaled correlations and score every cell (MKSM).
    Pca(pca::PcaArgs),
    /// Train a GPR model on a seeded split (MKSM).
    Train(train::TrainArgs),
    /// Evaluate a trained model (parity CSV and report).
    Eval(eval::EvalArgs),
    /// Train every combination and component count (MAE table).
    Sweep(sweep::SweepArgs),
    /// Active learning (learning curves CSV).
    Al(al::AlArgs),
    /// Convert external data into native artifacts.
    Import(import::ImportArgs),
    /// Emit an SVG chart with its backing CSV.
    Plot(plot::PlotArgs),
}

pub fn execute(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed()).unwrap_or(0);
    match &cli.command {
        Command::Gen(a) => gen::run(&file.merge("gen", a)?, seed).map(drop),
        Command::Label(a) => label::run(&file.merge("label", a)?).map(drop),
        Command::Features(a) => features::run(&file.merge("features", a)?).map(drop),
        Command::Pca(a) => pca::run(&file.merge("pca", a)?, seed).map(drop),
        Command::Train(a) => train::run(&file.merge("train", a)?, seed).map(drop),
        Command::Eval(a) => eval::run(&file.merge("eval", a)?).map(drop),
        Command::Sweep(a) => sweep::run(&file.merge("sweep", a)?, seed).map(drop),
        Command::Al(a) => al::run(&file.merge("al", a)?, seed).map(drop),
        Command::Import(a) => import::run(&file.merge("import", a)?).map(drop),
        Command::Plot(a) => plot::run(&file.merge("plot", a)?).map(drop),
    }
}
