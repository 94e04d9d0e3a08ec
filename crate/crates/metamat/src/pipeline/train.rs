use std::path::PathBuf;

use clap::Args;
use metamat_core::gpr::{FitConfig, Hyperparameters, DEFAULT_MAX_EXACT_N};
use serde::{Deserialize, Serialize};

use super::artifacts::{combination_of, gpr_to_mksm, pca_from_mksm, StoredGpr, PCA_KIND};
use super::experiment::{split_kept, train_only, TrainSettings};
use super::{check_fraction, kept_path, load_labeled, required};
use crate::error::{PipelineError, Result};
use crate::formats::mksm::Mksm;
use crate::manifest::RunRecorder;

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TrainArgs {
    /// PCA artifact with the scores of every cell.
    #[arg(long)]
    pub pca: Option<PathBuf>,
    /// Labels CSV.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Kept-index CSV (defaults to the one next to the labels).
    #[arg(long)]
    pub kept: Option<PathBuf>,
    #[arg(long)]
    pub n_components: Option<usize>,
    /// Training fraction of the kept cells.
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
    /// Optimize hyperparameters on a seeded subsample of this many rows.
    #[arg(long)]
    pub optimize_subsample: Option<usize>,
    /// Train on a seeded subsample of this many rows of the training split.
    #[arg(long)]
    pub train_subsample: Option<usize>,
    #[arg(long)]
    pub init_sigma_f: Option<f64>,
    #[arg(long)]
    pub init_sigma_n: Option<f64>,
    #[arg(long)]
    pub init_lengthscale: Option<f64>,
    /// Output model (MKSM).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Optimizer settings shared by `train`, `sweep` and `al`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FitParams {
    pub restarts: usize,
    pub iters: usize,
    pub learning_rate: f64,
    pub max_exact_n: usize,
    pub optimize_subsample: Option<usize>,
}

impl FitParams {
    pub fn resolve(
        restarts: Option<usize>,
        iters: Option<usize>,
        learning_rate: Option<f64>,
        max_exact_n: Option<usize>,
        optimize_subsample: Option<usize>,
    ) -> Result<Self> {
        let d = FitConfig::default();
        let p = Self {
            restarts: restarts.unwrap_or(d.restarts),
            iters: iters.unwrap_or(d.iterations),
            learning_rate: learning_rate.unwrap_or(d.learning_rate),
            max_exact_n: max_exact_n.unwrap_or(DEFAULT_MAX_EXACT_N),
            optimize_subsample,
        };
        if p.restarts == 0 || p.learning_rate.is_nan() || p.learning_rate <= 0.0 {
            return Err(PipelineError::Argument("--restarts must be at least 1 and --learning-rate positive".into()));
        }
        Ok(p)
    }

    pub fn config(&self) -> FitConfig {
        FitConfig {
            restarts: self.restarts,
            iterations: self.iters,
            learning_rate: self.learning_rate,
            seed: 0,
            max_exact_n: self.max_exact_n,
            optimize_subsample: self.optimize_subsample,
            initial: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct TrainParams {
    n_components: usize,
    split: f64,
    train_subsample: Option<usize>,
    fit: FitParams,
    initial: Option<(f64, f64, f64)>,
}

pub fn run(args: &TrainArgs, seed: u64) -> Result<PathBuf> {
    let pca_path = required(args.pca.clone(), "pca")?;
    let labels_path = required(args.labels.clone(), "labels")?;
    let kept = args.kept.clone().unwrap_or_else(|| kept_path(&labels_path));
    let out = required(args.out.clone(), "out")?;
    let n_components = args.n_components.unwrap_or(6);
    let split = check_fraction(args.split.unwrap_or(0.8), "split")?;
    let fit = FitParams::resolve(args.restarts, args.iters, args.learning_rate, args.max_exact_n, args.optimize_subsample)?;
    let initial = match (args.init_sigma_f, args.init_sigma_n, args.init_lengthscale) {
        (None, None, None) => None,
        (sf, sn, l) => Some((sf.unwrap_or(1.0), sn.unwrap_or(0.05), l.unwrap_or(1.0))),
    };
    let params = TrainParams { n_components, split, train_subsample: args.train_subsample, fit, initial };
    let mut rec = RunRecorder::new("train", Some(seed), &params);
    rec.input("pca", &pca_path)?;
    rec.input("labels", &labels_path)?;
    rec.input("kept", &kept)?;

    let container = Mksm::read(&pca_path, PCA_KIND, "pca")?;
    let combination = combination_of(&container)?;
    let (_, scores) = pca_from_mksm(&container, &pca_path)?;
    let data = load_labeled(&labels_path, &kept, scores.rows())?;
    let mut fit_config = params.fit.config();
    fit_config.initial = initial.map(|(sf, sn, l)| Hyperparameters::new(sf, sn, &vec![l; n_components]));
    let settings = TrainSettings { n_components, split, fit: fit_config, max_train: args.train_subsample };
    let (train, test) = split_kept(&data.kept, &settings, seed);
    let (model, report, scaler) = rec.time("fit", || train_only(&scores, &data.y, &train, &settings, seed))?;
    log::info!(
        "trained on {} cells ({} held out): NLML {:.6}, restart {} of {}",
        train.len(),
        test.len(),
        report.nlml,
        report.best_restart,
        report.restarts_attempted
    );
    let stored = StoredGpr { model, scaler, combination, train, test };
    gpr_to_mksm(&stored).write(&out)?;
    rec.output("model", &out)?;
    rec.write(&out)?;
    Ok(out)
}
