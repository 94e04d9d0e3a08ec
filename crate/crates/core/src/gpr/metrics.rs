use crate::error::{arg_err, Error, Result};

/// Regression error summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub mae: f64,
    pub r2: f64,
    /// MAE divided by the range of the true values.
    pub nmae: f64,
}

pub fn mae(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(arg_err!("metric inputs of lengths {} and {}", y_true.len(), y_pred.len()));
    }
    Ok(y_true.iter().zip(y_pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / y_true.len() as f64)
}

pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<Metrics> {
    let mae = mae(y_true, y_pred)?;
    let (lo, hi) = y_true.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(Error::UndefinedMetric("true values are constant".into()));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(Metrics { mae, r2: 1.0 - ss_res / ss_tot, nmae: mae / range })
}
