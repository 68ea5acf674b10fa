//! Bias-corrected adaptive-moment optimizer.

use super::mlp::{Gradients, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment accumulators for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first: Gradients,
    pub second: Gradients,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &Mlp, config: AdamConfig) -> Self {
        Self {
            config,
            first: Gradients::zeros_like(params),
            second: Gradients::zeros_like(params),
            step: 0,
        }
    }
}

fn check_shapes(params: &Mlp, grads: &Gradients) -> Result<()> {
    if grads.layers.len() != params.layers().len() {
        return Err(Error::Shape(format!(
            "{} gradient layers for {} parameter layers",
            grads.layers.len(),
            params.layers().len()
        )));
    }
    for (i, (g, p)) in grads.layers.iter().zip(params.layers()).enumerate() {
        if g.weights.shape() != p.weights.shape() || g.bias.len() != p.bias.len() {
            return Err(Error::Shape(format!("gradient/parameter mismatch at layer {i}")));
        }
    }
    Ok(())
}

/// One optimizer step, in place. Nothing is modified when an error is returned.
pub fn opt_step(params: &mut Mlp, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    check_shapes(params, grads)?;
    check_shapes(params, &state.first)?;
    check_shapes(params, &state.second)?;
    for (i, g) in grads.layers.iter().enumerate() {
        if !g.weights.all_finite() || g.bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { layer: i });
        }
    }

    state.step += 1;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = state.config;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);

    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };

    for (l, layer) in params.layers_mut().iter_mut().enumerate() {
        let g = &grads.layers[l];
        let m = &mut state.first.layers[l];
        let v = &mut state.second.layers[l];
        for (((p, &gi), mi), vi) in layer
            .weights
            .as_mut_slice()
            .iter_mut()
            .zip(g.weights.as_slice())
            .zip(m.weights.as_mut_slice())
            .zip(v.weights.as_mut_slice())
        {
            update(p, gi, mi, vi);
        }
        for (((p, &gi), mi), vi) in layer
            .bias
            .iter_mut()
            .zip(&g.bias)
            .zip(m.bias.iter_mut())
            .zip(v.bias.iter_mut())
        {
            update(p, gi, mi, vi);
        }
    }
    Ok(())
}
