//! Pool-based uncertainty sampling with a sliding-window stopping rule.

mod posterior;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;

use crate::error::{arg_err, Error, Result};
use crate::gpr::{fit, mae, FitConfig, GprModel, Hyperparameters};
use crate::linalg::Matrix;
use crate::seed::{derive_seed, derive_seed_index, rng_from_seed};
use crate::statistics::Standardizer;
use posterior::PoolPosterior;

/// Stopping parameters: window `Q`, tolerance `ε` and a hard label budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    pub window: usize,
    pub epsilon: f64,
    pub budget: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { window: 5, epsilon: 1e-4, budget: 600 }
    }
}

impl StopRule {
    pub fn validate(&self, n_init: usize) -> Result<()> {
        if self.window == 0 || !(self.epsilon > 0.0) || self.budget < n_init {
            return Err(arg_err!(
                "invalid stop rule (window {}, epsilon {}, budget {} for {n_init} initial points)",
                self.window,
                self.epsilon,
                self.budget
            ));
        }
        Ok(())
    }
}

/// True when the mean absolute relative change of the last `Q` consecutive
/// pairs is below `ε`. A zero value in a denominator counts as converged.
pub fn stopping_met(history: &[f64], rule: &StopRule) -> bool {
    let q = rule.window;
    if q == 0 || history.len() < q + 1 {
        return false;
    }
    let tail = &history[history.len() - q - 1..];
    let mut total = 0.0;
    for w in tail.windows(2) {
        if w[0] == 0.0 {
            return true;
        }
        total += ((w[1] - w[0]) / w[0]).abs();
    }
    total / (q as f64) < rule.epsilon
}

/// Labeled/pool partition of the candidate indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveState {
    pub labeled: Vec<usize>,
    pub pool: Vec<usize>,
    pub history: Vec<CurveRow>,
}

impl ActiveState {
    pub fn iteration(&self) -> usize {
        self.history.len()
    }

    /// Labeled, pool and `excluded` cover `0..n_total` exactly once.
    pub fn check_partition(&self, n_total: usize, excluded: &[usize]) -> bool {
        let mut seen = vec![false; n_total];
        for &i in self.labeled.iter().chain(&self.pool).chain(excluded) {
            if i >= n_total || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        seen.iter().all(|&s| s)
    }
}

/// Draws `n_init` distinct labeled indices; the rest form the pool in
/// ascending order.
pub fn init_state(n_total: usize, n_init: usize, seed: u64) -> Result<ActiveState> {
    if n_init == 0 || n_init >= n_total {
        return Err(arg_err!("need 1 <= n_init < n_total, got n_init {n_init} of {n_total}"));
    }
    let mut rng = rng_from_seed(derive_seed(seed, "al-init"));
    let labeled = sample(&mut rng, n_total, n_init).into_vec();
    let mut chosen = vec![false; n_total];
    for &i in &labeled {
        chosen[i] = true;
    }
    let pool = (0..n_total).filter(|&i| !chosen[i]).collect();
    Ok(ActiveState { labeled, pool, history: Vec::new() })
}

/// Position in the pool of the largest value; ties go to the lowest position.
fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Pool position of the maximum predictive variance.
pub fn query_max_variance(model: &GprModel, pool_features: &Matrix) -> Result<usize> {
    if pool_features.rows() == 0 {
        return Err(Error::State("empty pool".into()));
    }
    let (_, var) = model.predict(pool_features)?;
    Ok(argmax(&var).unwrap())
}

/// One learning-curve row, recorded after fitting on the labeled set.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub iteration: usize,
    pub n_labeled: usize,
    /// MAE over every candidate, labeled or not (benchmark mode only).
    pub pool_mae: Option<f64>,
    pub max_pool_std: f64,
    /// Candidate queried after this row, if any.
    pub chosen_index: Option<usize>,
    /// Set on the final row when the stopping rule fired.
    pub stopped: bool,
    pub theta: Hyperparameters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearningCurve {
    pub rows: Vec<CurveRow>,
    pub repetition: usize,
    pub seed: u64,
    /// Candidates whose labeling failed and were dropped from the pool.
    pub skipped: Vec<usize>,
    pub labeled: Vec<usize>,
}

impl LearningCurve {
    pub fn stopped_by_rule(&self) -> bool {
        self.rows.last().is_some_and(|r| r.stopped)
    }

    pub fn final_row(&self) -> &CurveRow {
        self.rows.last().expect("a learning curve always has its initialization row")
    }
}

/// When hyperparameters are re-optimized during a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RefitSchedule {
    /// After every `k` added labels (`k = 1` re-optimizes every iteration).
    Every(usize),
    /// Whenever the labeled set has grown by the given factor since the
    /// last optimization.
    Geometric(f64),
}

impl RefitSchedule {
    fn due(self, n_labeled: usize, last_refit_n: usize) -> bool {
        match self {
            RefitSchedule::Every(k) => n_labeled >= last_refit_n + k.max(1),
            RefitSchedule::Geometric(r) => n_labeled as f64 >= last_refit_n as f64 * r.max(1.0),
        }
    }
}

/// Source of the standardization applied to the raw features.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    /// Features are used as given (already standardized over the ensemble).
    AsGiven,
    /// A scaler is fitted on the labeled rows and refreshed every iteration.
    LabeledRefresh,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActiveConfig {
    pub n_init: usize,
    pub rule: StopRule,
    /// Optimizer settings of the initial fit.
    pub initial_fit: FitConfig,
    /// Optimizer settings of later refits; the previous optimum seeds the
    /// first restart.
    pub refit: FitConfig,
    pub refit_schedule: RefitSchedule,
    pub scaling: Scaling,
    /// Oracle mode only: stop on the relative change of the max pool std.
    pub oracle_std_stop: bool,
}

impl Default for ActiveConfig {
    fn default() -> Self {
        Self {
            n_init: 10,
            rule: StopRule::default(),
            initial_fit: FitConfig::default(),
            refit: FitConfig { restarts: 2, ..FitConfig::default() },
            refit_schedule: RefitSchedule::Every(1),
            scaling: Scaling::AsGiven,
            oracle_std_stop: false,
        }
    }
}

/// Where labels come from.
pub enum Labels<'a> {
    /// All labels known up front; the pool MAE is reported.
    Known(&'a [f64]),
    /// Labels produced on demand by index; failures are skipped.
    Oracle(&'a mut dyn FnMut(usize) -> Result<f64>),
}

impl Labels<'_> {
    fn get(&mut self, index: usize) -> Result<f64> {
        match self {
            Labels::Known(y) => Ok(y[index]),
            Labels::Oracle(f) => f(index),
        }
    }
}

fn scaled_features(features: &Matrix, labeled: &[usize], scaling: Scaling) -> Result<Matrix> {
    match scaling {
        Scaling::AsGiven => Ok(features.clone()),
        Scaling::LabeledRefresh => Standardizer::fit(&features.select_rows(labeled))?.apply(features),
    }
}

/// Runs one active-learning loop and returns its curve with the final model.
pub fn run(
    features: &Matrix,
    mut labels: Labels<'_>,
    config: &ActiveConfig,
    seed: u64,
) -> Result<(LearningCurve, GprModel)> {
    let n_total = features.rows();
    if let Labels::Known(y) = &labels {
        if y.len() != n_total {
            return Err(Error::Dimension(format!("{} labels for {n_total} candidates", y.len())));
        }
    }
    config.rule.validate(config.n_init)?;
    let mut state = init_state(n_total, config.n_init, seed)?;
    let benchmark = matches!(labels, Labels::Known(_));

    let mut skipped = Vec::new();
    let mut y_labeled = Vec::with_capacity(config.rule.budget);
    let mut kept = Vec::with_capacity(config.rule.budget);
    for &i in &state.labeled {
        match labels.get(i) {
            Ok(v) => {
                kept.push(i);
                y_labeled.push(v);
            }
            Err(_) => skipped.push(i),
        }
    }
    state.labeled = kept;
    if state.labeled.len() < 2 {
        return Err(Error::State(format!("only {} initial points could be labeled", state.labeled.len())));
    }

    let mut x = scaled_features(features, &state.labeled, config.scaling)?;
    let fit_config = FitConfig { seed: derive_seed(seed, "al-fit-0"), ..config.initial_fit.clone() };
    let (mut model, _) = fit(&x.select_rows(&state.labeled), &y_labeled, &fit_config)?;
    let mut posterior = PoolPosterior::build(&model, &x, &state.labeled, &y_labeled)?;
    let mut last_refit_n = state.labeled.len();

    let candidates: Vec<usize> = (0..n_total).collect();
    let mut std_history = Vec::new();
    let mut mae_history = Vec::new();
    loop {
        let (_, var) = posterior.predict(&state.pool);
        let max_var = var.iter().cloned().fold(0.0f64, f64::max);
        // error over the whole fixed candidate set, labeled points included
        let pool_mae = match &labels {
            Labels::Known(y) => Some(mae(y, &posterior.predict(&candidates).0)?),
            _ => None,
        };
        if let Some(m) = pool_mae {
            mae_history.push(m);
        }
        std_history.push(max_var.sqrt());
        let stopped = if benchmark {
            stopping_met(&mae_history, &config.rule)
        } else {
            config.oracle_std_stop && stopping_met(&std_history, &config.rule)
        };
        state.history.push(CurveRow {
            iteration: state.history.len(),
            n_labeled: state.labeled.len(),
            pool_mae,
            max_pool_std: max_var.sqrt(),
            chosen_index: None,
            stopped,
            theta: posterior.hyperparameters().clone(),
        });
        if stopped || state.labeled.len() >= config.rule.budget || state.pool.is_empty() {
            break;
        }

        // query, skipping candidates the oracle cannot label
        let mut order: Vec<usize> = (0..state.pool.len()).collect();
        order.sort_by(|&a, &b| var[b].total_cmp(&var[a]).then(a.cmp(&b)));
        let mut chosen = None;
        let mut failed = Vec::new();
        for &pos in &order {
            let idx = state.pool[pos];
            match labels.get(idx) {
                Ok(v) => {
                    chosen = Some((pos, idx, v));
                    break;
                }
                Err(_) => failed.push(pos),
            }
        }
        let Some((pos, idx, value)) = chosen else {
            skipped.extend(failed.iter().map(|&p| state.pool[p]));
            state.pool.clear();
            break;
        };
        debug_assert!(!failed.is_empty() || var.iter().all(|&v| v <= var[pos]));
        state.history.last_mut().unwrap().chosen_index = Some(idx);
        failed.push(pos);
        failed.sort_unstable();
        for &p in failed.iter().rev() {
            let removed = state.pool.remove(p);
            if removed != idx {
                skipped.push(removed);
            }
        }
        state.labeled.push(idx);
        y_labeled.push(value);

        let refit_due = config.refit_schedule.due(state.labeled.len(), last_refit_n);
        if refit_due || config.scaling == Scaling::LabeledRefresh {
            x = scaled_features(features, &state.labeled, config.scaling)?;
        }
        if refit_due {
            let refit = FitConfig {
                seed: derive_seed_index(derive_seed(seed, "al-refit"), state.labeled.len() as u64),
                initial: Some(model.hyperparameters().clone()),
                ..config.refit.clone()
            };
            model = fit(&x.select_rows(&state.labeled), &y_labeled, &refit)?.0;
            posterior = PoolPosterior::build(&model, &x, &state.labeled, &y_labeled)?;
            last_refit_n = state.labeled.len();
        } else if config.scaling == Scaling::LabeledRefresh || posterior.add(idx, value).is_err() {
            model = GprModel::condition(x.select_rows(&state.labeled), &y_labeled, model.hyperparameters().clone())?;
            posterior = PoolPosterior::build(&model, &x, &state.labeled, &y_labeled)?;
        }
        debug_assert!(state.check_partition(n_total, &skipped));
    }

    let final_model =
        GprModel::condition(x.select_rows(&state.labeled), &y_labeled, posterior.hyperparameters().clone())?;
    let curve = LearningCurve {
        rows: state.history,
        repetition: 0,
        seed,
        skipped,
        labeled: state.labeled,
    };
    Ok((curve, final_model))
}

/// Per-iteration statistics across repetitions.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub iteration: usize,
    pub mean_n_labeled: f64,
    pub mean_pool_mae: Option<f64>,
    pub std_pool_mae: Option<f64>,
    pub mean_max_std: f64,
    pub std_max_std: f64,
    /// Repetitions that had already stopped and were carried forward.
    pub padded: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aligns curves by iteration, carrying each finished curve's last row.
pub fn aggregate_curves(curves: &[LearningCurve]) -> Vec<AggregateRow> {
    let longest = curves.iter().map(|c| c.rows.len()).max().unwrap_or(0);
    (0..longest)
        .map(|it| {
            let rows: Vec<&CurveRow> = curves.iter().map(|c| &c.rows[it.min(c.rows.len() - 1)]).collect();
            let padded = curves.iter().filter(|c| it >= c.rows.len()).count();
            let n: Vec<f64> = rows.iter().map(|r| r.n_labeled as f64).collect();
            let s: Vec<f64> = rows.iter().map(|r| r.max_pool_std).collect();
            let m: Option<Vec<f64>> = rows.iter().map(|r| r.pool_mae).collect();
            let (mean_max_std, std_max_std) = mean_std(&s);
            let mae_stats = m.map(|m| mean_std(&m));
            AggregateRow {
                iteration: it,
                mean_n_labeled: mean_std(&n).0,
                mean_pool_mae: mae_stats.map(|p| p.0),
                std_pool_mae: mae_stats.map(|p| p.1),
                mean_max_std,
                std_max_std,
                padded,
            }
        })
        .collect()
}

/// Benchmark-mode repetitions with seeds derived from `base_seed`.
pub fn repeat_runs(
    n_reps: usize,
    base_seed: u64,
    features: &Matrix,
    labels: &[f64],
    config: &ActiveConfig,
) -> Result<(Vec<LearningCurve>, Vec<AggregateRow>)> {
    if n_reps == 0 {
        return Err(arg_err!("at least one repetition is required"));
    }
    let mut curves = Vec::with_capacity(n_reps);
    for rep in 0..n_reps {
        let seed = derive_seed_index(base_seed, rep as u64);
        let (mut curve, _) = run(features, Labels::Known(labels), config, seed)?;
        curve.repetition = rep;
        curves.push(curve);
    }
    let aggregate = aggregate_curves(&curves);
    Ok((curves, aggregate))
}

/// Trailing moving average over `window` values.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..values.len())
        .map(|i| {
            let start = (i + 1).saturating_sub(w);
            values[start..=i].iter().sum::<f64>() / (i + 1 - start) as f64
        })
        .collect()
}
