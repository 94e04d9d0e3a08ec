//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 5-7 share one generated and labeled 2,000-cell dataset. A missed
//! threshold prints FAIL and is listed in the closing summary; an error or a
//! broken invariant aborts the run with a non-zero exit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use metamat::core::active::{ActiveConfig, RefitSchedule, Scaling, StopRule};
use metamat::core::geometry::{
    generate_dataset, volume_fraction, BinaryGrid, GenConfig, PhaseMask, UnitCell, INTERFACE, SOLID,
};
use metamat::core::gpr::{nlml_and_grad, FitConfig, GprModel, Hyperparameters};
use metamat::core::homogenize::{effective_c11, Homogenizer, LabelConfig, Material};
use metamat::core::linalg::{thin_q, Matrix};
use metamat::core::seed::{derive_seed, derive_seed_index, rng_from_seed};
use metamat::core::statistics::{
    pca_fit, pca_reconstruct, pca_transform, two_point_direct, two_point_fft, Combination, LazyFeatures,
};
use metamat::formats::mksd;
use metamat::pipeline::al::summarize;
use metamat::pipeline::experiment::{gather, pool_features, repeat_benchmark, train_eval, TrainSettings};
use metamat::pipeline::label::label_parallel;
use metamat::pipeline::{kept_path, load_labeled};
use rand::Rng;
use sha2::{Digest, Sha256};

const SEED: u64 = 2024;

const SOLID_TOL: f64 = 1e-8;
const LAMINATE_TOL: f64 = 1e-6;
const SERIES_TOL: f64 = 1e-6;
const BETA_REL_TOL: f64 = 1e-9;
const CORRELATION_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-8;
const SVD_SCORE_TOL: f64 = 1e-6;
const GRADIENT_REL_TOL: f64 = 1e-4;
const INTERPOLATION_TOL: f64 = 1e-6;
const FAR_FIELD_TOL: f64 = 1e-6;
const BASELINE_RATIO: f64 = 0.5;
const COMBINATION_RATIO: f64 = 1.05;
const AL_REPS: usize = 25;
const AL_MIN_STOPPED: usize = 20;
const AL_MAE_RATIO: f64 = 1.15;
const AL_STD_RATIO: f64 = 0.5;
const PUBLISHED_MAE: (f64, f64) = (0.020, 0.035);
const PUBLISHED_R2: f64 = 0.85;
const PUBLISHED_STOP: (f64, f64) = (200.0, 500.0);
const PUBLISHED_AL_MAE: (f64, f64) = (0.022, 0.032);

type Res<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Default)]
struct Tally {
    passed: usize,
    failed: Vec<String>,
    skipped: Vec<String>,
}

impl Tally {
    fn record(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        println!("{} [{id}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        if pass {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }

    fn skip(&mut self, id: &str, title: &str, why: &str) {
        println!("SKIP [{id}] {title}: {why}");
        self.skipped.push(id.to_string());
    }
}

fn plane_strain_c11(e: f64, nu: f64) -> f64 {
    e * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu))
}

fn stripes(n: usize, continuous_along_loading: bool) -> UnitCell {
    // loading axis 1 runs along the row index
    let cells = (0..n * n)
        .map(|i| {
            let (row, col) = (i / n, i % n);
            u8::from(if continuous_along_loading { col < n / 2 } else { row < n / 2 })
        })
        .collect();
    UnitCell::new(n, n, cells).unwrap()
}

fn homogenizer_suite(t: &mut Tally) -> Res<()> {
    let m = Material::new(1.0, 0.3)?;
    let solid = effective_c11(&UnitCell::filled(32, 32, 1)?, &m, 1e-10)?.normalized_c11;
    let solid_err = (solid - plane_strain_c11(1.0, 0.3)).abs();
    let parallel = effective_c11(&stripes(32, true), &m, 1e-10)?.normalized_c11;
    let parallel_err = (parallel - 0.5 / (1.0 - 0.3 * 0.3)).abs();
    let series = effective_c11(&stripes(32, false), &m, 1e-10)?.normalized_c11.abs();
    let cell = generate_dataset(1, SEED, &GenConfig::default())?.remove(0);
    let mut h = Homogenizer::new(cell.width(), cell.height());
    let mut values = Vec::new();
    for beta in [1e-3, 1e-2, 1e-1] {
        values.push(h.effective_c11(&cell, &m, beta, 1e-10, 20_000)?.0.c11);
    }
    let beta_rel = values.iter().map(|v| ((v - values[0]) / values[0]).abs()).fold(0.0, f64::max);
    t.record(
        "1",
        "homogenizer analytic suite",
        solid_err <= SOLID_TOL && parallel_err <= LAMINATE_TOL && series <= SERIES_TOL && beta_rel <= BETA_REL_TOL,
        format!(
            "solid {solid:.9} (err {solid_err:.1e}), parallel {parallel:.9} (err {parallel_err:.1e}), \
             series {series:.1e}, beta spread {beta_rel:.1e}"
        ),
    );
    Ok(())
}

fn random_mask(rng: &mut impl Rng, phase: u8) -> PhaseMask {
    let p: f64 = rng.random();
    let cells = (0..144).map(|_| u8::from(rng.random::<f64>() < p)).collect();
    PhaseMask::new(12, 12, cells, phase).unwrap()
}

fn correlation_oracle(t: &mut Tally) -> Res<()> {
    let mut rng = rng_from_seed(SEED);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = random_mask(&mut rng, SOLID);
        let b = random_mask(&mut rng, INTERFACE);
        for (x, y) in [(&a, &a), (&b, &b), (&a, &b), (&b, &a)] {
            let fast = two_point_fft(x, y)?;
            let slow = two_point_direct(x, y)?;
            for (p, q) in fast.values().iter().zip(slow.values()) {
                worst = worst.max((p - q).abs());
            }
        }
    }
    let cells = generate_dataset(1000, derive_seed(SEED, "gen"), &GenConfig::default())?;
    let mut mismatched = 0;
    for cell in &cells {
        let mask = cell.solid_mask();
        if two_point_fft(&mask, &mask)?.at(0, 0) != volume_fraction(cell) {
            mismatched += 1;
        }
    }
    t.record(
        "2",
        "correlation oracle",
        worst <= CORRELATION_TOL && mismatched == 0,
        format!("fft vs direct max diff {worst:.1e} on 100 pairs, f11(0) != vf on {mismatched} of 1000 cells"),
    );
    Ok(())
}

fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

fn pca_suite(t: &mut Tally) -> Res<()> {
    let (rows, cols, k) = (200, 500, 8);
    let u = thin_q(&uniform_matrix(rows, rows, 1));
    let v = thin_q(&uniform_matrix(cols, rows, 2));
    let x = Matrix::from_fn(rows, cols, |i, j| {
        (0..rows).map(|r| u[(i, r)] * 10.0 * 0.8f64.powi(r as i32) * v[(j, r)]).sum()
    });
    let model = pca_fit(&x, k, SEED)?;
    let gram = model.basis.matmul(&model.basis.transpose())?;
    let ortho = gram.max_abs_diff(&Matrix::identity(k));
    let ordered = model.explained_variance.windows(2).all(|w| w[0] >= w[1]);
    let scores = pca_transform(&model, &x)?;

    let centered = nalgebra::DMatrix::from_fn(rows, cols, |i, j| x[(i, j)] - model.mean[j]);
    let svd = centered.svd(true, false);
    let u_exact = svd.u.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut score_err = 0.0f64;
    for (c, &j) in order.iter().take(k).enumerate() {
        let sigma = svd.singular_values[j];
        let sign = (0..rows).map(|i| scores[(i, c)] * u_exact[(i, j)]).sum::<f64>().signum();
        for i in 0..rows {
            score_err = score_err.max((scores[(i, c)] - sign * sigma * u_exact[(i, j)]).abs());
        }
    }

    let small = uniform_matrix(40, 120, 3);
    let full = pca_fit(&small, 39, SEED)?;
    let back = pca_reconstruct(&full, &pca_transform(&full, &small)?)?;
    let recon = back.max_abs_diff(&small);
    t.record(
        "3",
        "PCA suite",
        ortho <= ORTHONORMAL_TOL && ordered && recon <= RECONSTRUCTION_TOL && score_err <= SVD_SCORE_TOL,
        format!(
            "orthonormality {ortho:.1e}, variance ordered {ordered}, full-rank reconstruction {recon:.1e}, \
             randomized vs exact scores {score_err:.1e}"
        ),
    );
    Ok(())
}

fn random_problem(rng: &mut impl Rng, n: usize, d: usize) -> (Matrix, Vec<f64>, Hyperparameters) {
    let x = Matrix::from_fn(n, d, |_, _| rng.random_range(-2.0..2.0));
    let y = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let theta = Hyperparameters {
        log_sigma_f: rng.random_range(-1.0..1.0),
        log_sigma_n: rng.random_range(-3.0..-1.0),
        log_lengthscales: (0..d).map(|_| rng.random_range(0.0..1.0)).collect(),
    };
    (x, y, theta)
}

fn gradient_error(theta: &Hyperparameters, x: &Matrix, y: &[f64]) -> Res<f64> {
    let (_, g) = nlml_and_grad(theta, x, y)?;
    let base = theta.to_vec();
    let h = 1e-5;
    let mut fd = vec![0.0; base.len()];
    for k in 0..base.len() {
        let (mut plus, mut minus) = (base.clone(), base.clone());
        plus[k] += h;
        minus[k] -= h;
        let fp = nlml_and_grad(&Hyperparameters::from_slice(&plus)?, x, y)?.0;
        let fm = nlml_and_grad(&Hyperparameters::from_slice(&minus)?, x, y)?.0;
        fd[k] = (fp - fm) / (2.0 * h);
    }
    let scale = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-8);
    Ok(g.iter().zip(&fd).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max))
}

fn gpr_suite(t: &mut Tally) -> Res<()> {
    let mut rng = rng_from_seed(SEED);
    let mut grad = 0.0f64;
    for _ in 0..50 {
        let (x, y, theta) = random_problem(&mut rng, 20, 6);
        grad = grad.max(gradient_error(&theta, &x, &y)?);
    }
    let mut interp = 0.0f64;
    let mut far = 0.0f64;
    for _ in 0..10 {
        let (x, y, mut theta) = random_problem(&mut rng, 20, 6);
        let noisy = GprModel::condition(x.clone(), &y, theta.clone())?;
        let point = Matrix::from_vec(1, 6, vec![1e3, -1e3, 1e3, -1e3, 1e3, -1e3])?;
        let (_, var) = noisy.predict(&point)?;
        far = far.max((var[0] - (theta.sigma_f().powi(2) + theta.sigma_n().powi(2))).abs());

        theta.log_sigma_n = 1e-7f64.ln();
        let exact = GprModel::condition(x.clone(), &y, theta)?;
        let (mean, _) = exact.predict(&x)?;
        interp = interp.max(mean.iter().zip(&y).map(|(m, v)| (m - v).abs()).fold(0.0, f64::max));
    }
    t.record(
        "4",
        "GPR suite",
        grad <= GRADIENT_REL_TOL && interp <= INTERPOLATION_TOL && far <= FAR_FIELD_TOL,
        format!(
            "gradient vs central differences {grad:.1e} (50 problems, N=20, D=6), \
             noiseless interpolation {interp:.1e}, far-field variance {far:.1e}"
        ),
    );
    Ok(())
}

struct Desk {
    y: Vec<f64>,
    kept: Vec<usize>,
    scores: BTreeMap<&'static str, Matrix>,
}

fn scores_for(cells: &[UnitCell], combination: Combination, n_components: usize, seed: u64) -> Res<Matrix> {
    let rescale = LazyFeatures::new(cells, combination, None)?.fit_rescale()?;
    let features = LazyFeatures::new(cells, combination, Some(rescale))?;
    let model = pca_fit(&features, n_components, derive_seed(seed, "pca"))?;
    Ok(pca_transform(&model, &features)?)
}

fn desk_dataset() -> Res<Desk> {
    let start = Instant::now();
    let cells = generate_dataset(2000, derive_seed(SEED, "gen"), &GenConfig::default())?;
    let batch = label_parallel(&cells, &Material::new(1.0, 0.3)?, &LabelConfig::default());
    if !batch.failures.is_empty() {
        return Err(format!("{} cells failed to label", batch.failures.len()).into());
    }
    let mut y = vec![f64::NAN; cells.len()];
    for l in &batch.labels {
        y[l.index] = l.normalized_c11;
    }
    let mut scores = BTreeMap::new();
    scores.insert("s", scores_for(&cells, Combination::S, 6, SEED)?);
    scores.insert("si", scores_for(&cells, Combination::SI, 6, SEED)?);
    println!(
        "      desk dataset: 2000 cells, {} kept, {} below the filter, prepared in {:.0} s",
        batch.kept.len(),
        batch.dropped.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(Desk { y, kept: batch.kept, scores })
}

fn fit_settings() -> FitConfig {
    FitConfig { restarts: 3, iterations: 300, optimize_subsample: Some(400), ..FitConfig::default() }
}

fn settings(split: f64) -> TrainSettings {
    TrainSettings { n_components: 6, split, fit: fit_settings(), max_train: None }
}

fn desk_models(t: &mut Tally, desk: &Desk) -> Res<()> {
    let mut ratios = Vec::new();
    let mut mae = BTreeMap::<&str, Vec<f64>>::new();
    for rep in 0..5u64 {
        for tag in ["s", "si"] {
            let out = train_eval(&desk.scores[tag], &desk.y, &desk.kept, &settings(0.8), derive_seed_index(derive_seed(SEED, "desk"), rep))?;
            mae.entry(tag).or_default().push(out.metrics.mae);
            if tag == "si" {
                ratios.push(out.metrics.mae / out.baseline_mae);
            }
        }
    }
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let listed: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    t.record(
        "5",
        "desk pipeline beats the mean predictor",
        worst <= BASELINE_RATIO,
        format!("si test MAE / baseline MAE over 5 seeds [{}] (bound {BASELINE_RATIO})", listed.join(", ")),
    );
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (si, s) = (mean(&mae["si"]), mean(&mae["s"]));
    t.record(
        "6",
        "interface statistics do not hurt",
        si <= COMBINATION_RATIO * s,
        format!("mean MAE si {si:.4} vs s {s:.4}, ratio {:.3}, gain {:.1}%", si / s, 100.0 * (1.0 - si / s)),
    );
    Ok(())
}

fn al_config(budget: usize) -> ActiveConfig {
    ActiveConfig {
        n_init: 10,
        rule: StopRule { window: 5, epsilon: 1e-4, budget },
        initial_fit: fit_settings(),
        refit: FitConfig { restarts: 2, iterations: 200, optimize_subsample: Some(400), ..FitConfig::default() },
        refit_schedule: RefitSchedule::Geometric(1.1),
        scaling: Scaling::AsGiven,
        oracle_std_stop: false,
    }
}

fn desk_active(t: &mut Tally, desk: &Desk) -> Res<()> {
    let start = Instant::now();
    let si = &desk.scores["si"];
    let features = pool_features(si, &desk.kept, 6, Scaling::AsGiven)?;
    let y = gather(&desk.y, &desk.kept)?;
    let (curves, _) = repeat_benchmark(&features, &y, &al_config(600), AL_REPS, SEED)?;
    let summary = summarize(&curves);
    let n = curves.len() as f64;
    let initial_std = curves.iter().map(|c| c.rows[0].max_pool_std).sum::<f64>() / n;
    let final_std = curves.iter().map(|c| c.final_row().max_pool_std).sum::<f64>() / n;
    // predictive std never drops below the fitted noise level
    let noise = curves.iter().map(|c| c.final_row().theta.sigma_n()).sum::<f64>() / n;
    let final_mae = summary.mean_final_pool_mae.ok_or("benchmark run without pool MAE")?;
    let split = 1600.0 / desk.kept.len() as f64;
    let reference = train_eval(si, &desk.y, &desk.kept, &settings(split), derive_seed(SEED, "reference"))?;
    println!(
        "      {AL_REPS} repetitions in {:.0} s, mean labeled at stop {:.1}",
        start.elapsed().as_secs_f64(),
        summary.mean_n_labeled
    );
    t.record(
        "7a",
        "active learning stops before the budget",
        summary.stopped_by_rule >= AL_MIN_STOPPED,
        format!("{} of {AL_REPS} runs stopped by the rule (need {AL_MIN_STOPPED})", summary.stopped_by_rule),
    );
    t.record(
        "7b",
        "active learning matches a 1,600-point model",
        final_mae <= AL_MAE_RATIO * reference.metrics.mae,
        format!(
            "mean final pool MAE {final_mae:.4} vs reference {:.4} ({} train cells), ratio {:.3}",
            reference.metrics.mae,
            reference.train.len(),
            final_mae / reference.metrics.mae
        ),
    );
    t.record(
        "7c",
        "active learning contracts the pool uncertainty",
        final_std <= AL_STD_RATIO * initial_std,
        format!(
            "mean max pool std {initial_std:.4} -> {final_std:.4}, ratio {:.3}; mean fitted sigma_n {noise:.4} \
             (floor ratio {:.3})",
            final_std / initial_std,
            noise / initial_std
        ),
    );
    Ok(())
}

fn published(t: &mut Tally) -> Res<()> {
    let title = "published dataset";
    let (Some(cells_path), Some(labels_path)) =
        (std::env::var_os("METAMAT_PUBLISHED_CELLS"), std::env::var_os("METAMAT_PUBLISHED_LABELS"))
    else {
        t.skip("8", title, "set METAMAT_PUBLISHED_CELLS (MKSD) and METAMAT_PUBLISHED_LABELS (labels CSV) to run");
        return Ok(());
    };
    let (cells_path, labels_path) = (PathBuf::from(cells_path), PathBuf::from(labels_path));
    let cells = mksd::read(&cells_path)?;
    let data = load_labeled(&labels_path, &kept_path(&labels_path), cells.len())?;
    let scores = scores_for(&cells, Combination::SI, 6, SEED)?;
    let train = TrainSettings { max_train: Some(8192), ..settings(0.8) };
    let out = train_eval(&scores, &data.y, &data.kept, &train, SEED)?;
    let (mae, r2) = (out.metrics.mae, out.metrics.r2);
    t.record(
        "8a",
        "published dataset regression",
        (PUBLISHED_MAE.0..=PUBLISHED_MAE.1).contains(&mae) && r2 >= PUBLISHED_R2,
        format!("test MAE {mae:.4}, R2 {r2:.3} with 8192 training cells"),
    );
    let features = pool_features(&scores, &data.kept, 6, Scaling::AsGiven)?;
    let y = gather(&data.y, &data.kept)?;
    let (curves, _) = repeat_benchmark(&features, &y, &al_config(1000), AL_REPS, SEED)?;
    let summary = summarize(&curves);
    let final_mae = summary.mean_final_pool_mae.unwrap_or(f64::NAN);
    t.record(
        "8b",
        "published dataset active learning",
        (PUBLISHED_STOP.0..=PUBLISHED_STOP.1).contains(&summary.mean_n_labeled)
            && (PUBLISHED_AL_MAE.0..=PUBLISHED_AL_MAE.1).contains(&final_mae),
        format!("mean labeled at stop {:.1}, mean final pool MAE {final_mae:.4}", summary.mean_n_labeled),
    );
    Ok(())
}

fn metamat(dir: &Path, args: &[&str]) -> Res<()> {
    let out = Command::new(env!("CARGO_BIN_EXE_metamat")).current_dir(dir).args(args).output()?;
    if !out.status.success() {
        return Err(format!("metamat {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)).into());
    }
    Ok(())
}

fn digests(dir: &Path) -> Res<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let bytes = if name.ends_with(".manifest.json") {
            let mut v: serde_json::Value = serde_json::from_slice(&fs::read(&path)?)?;
            v.as_object_mut().ok_or("manifest is not an object")?.remove("timings");
            serde_json::to_vec(&v)?
        } else {
            fs::read(&path)?
        };
        map.insert(name, hex::encode(Sha256::digest(&bytes)));
    }
    Ok(map)
}

fn determinism(t: &mut Tally) -> Res<()> {
    let runs = [tempfile::tempdir()?, tempfile::tempdir()?];
    let seed = SEED.to_string();
    for dir in &runs {
        let d = dir.path();
        metamat(d, &["gen", "--count", "20", "--seed", &seed, "--out", "cells.mksd"])?;
        metamat(d, &["label", "--cells", "cells.mksd", "--out", "labels.csv"])?;
        for c in ["s", "si"] {
            let (rescale, pca) = (format!("rescale_{c}.mksm"), format!("pca_{c}.mksm"));
            metamat(d, &["features", "--cells", "cells.mksd", "--combination", c, "--out", &rescale])?;
            metamat(d, &["pca", "--cells", "cells.mksd", "--rescale", &rescale, "--n-components", "6", "--seed", &seed, "--out", &pca])?;
        }
        metamat(d, &["train", "--pca", "pca_si.mksm", "--labels", "labels.csv", "--restarts", "2", "--iters", "40", "--seed", &seed, "--out", "model.mksm"])?;
        metamat(d, &["eval", "--model", "model.mksm", "--pca", "pca_si.mksm", "--labels", "labels.csv", "--out", "parity.csv"])?;
        metamat(d, &["sweep", "--pca", "pca_s.mksm,pca_si.mksm", "--labels", "labels.csv", "--components", "1,2,3", "--restarts", "1", "--iters", "20", "--seed", &seed, "--out", "sweep.csv"])?;
        metamat(d, &["al", "--pca", "pca_si.mksm", "--labels", "labels.csv", "--n-init", "4", "--budget", "10", "--reps", "2", "--restarts", "1", "--iters", "20", "--seed", &seed, "--out", "curves.csv"])?;
        metamat(d, &["plot", "--kind", "pc-scatter", "--pca", "pca_si.mksm", "--cells", "cells.mksd", "--out", "pcs.svg"])?;
        metamat(d, &["plot", "--kind", "learning-curve", "--input", "curves.csv", "--out", "lc.svg"])?;
    }
    let (a, b) = (digests(runs[0].path())?, digests(runs[1].path())?);
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    t.record(
        "9",
        "seeded reruns are byte-identical",
        differing.is_empty() && a.len() == b.len(),
        format!("{} artifacts hashed, {} differ {:?}", a.len(), differing.len(), differing),
    );
    Ok(())
}

fn run() -> Res<Tally> {
    let mut t = Tally::default();
    homogenizer_suite(&mut t)?;
    correlation_oracle(&mut t)?;
    pca_suite(&mut t)?;
    gpr_suite(&mut t)?;
    let desk = desk_dataset()?;
    desk_models(&mut t, &desk)?;
    desk_active(&mut t, &desk)?;
    published(&mut t)?;
    determinism(&mut t)?;
    Ok(t)
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters come through as arguments
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    match run() {
        Ok(t) => {
            println!(
                "acceptance: {} passed, {} failed {:?}, {} skipped {:?} in {:.0} s",
                t.passed,
                t.failed.len(),
                t.failed,
                t.skipped.len(),
                t.skipped,
                start.elapsed().as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            println!("acceptance aborted: {e}");
            ExitCode::FAILURE
        }
    }
}
