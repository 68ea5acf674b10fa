//! Log-sum-exp smoothing of the maximum and the matching softmax.

use crate::error::{Error, Result};

/// `(1/γ) · ln Σ exp(γ·v_i)`, evaluated around the maximum so large `γ·v`
/// cannot overflow.
pub fn lse_max(values: &[f64], gamma: f64) -> Result<f64> {
    check(values, gamma)?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|v| (gamma * (v - max)).exp()).sum();
    Ok(max + sum.ln() / gamma)
}

/// `softmax(γ·v)`, the gradient of [`lse_max`] with respect to `v`.
pub fn softmax_weights(values: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check(values, gamma)?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (gamma * (v - max)).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

fn check(values: &[f64], gamma: f64) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Input("need at least one value".into()));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Input(format!("gamma {gamma} must be finite and > 0")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("values must be finite".into()));
    }
    Ok(())
}
