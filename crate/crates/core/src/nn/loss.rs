//! Cross-entropy surrogates for 0-1 risk, mean-reduced over the batch.

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Multiclass softmax cross-entropy; needs at least two logits.
    SoftmaxXent,
    /// Binary logistic loss on one logit, or on `z1 - z0` for two logits.
    Logistic,
}

#[derive(Debug, Clone)]
pub struct LossOutput {
    pub value: f64,
    /// `∂value/∂logits`, same shape as the logits.
    pub grad: Matrix,
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn loss(logits: &Matrix, labels: &[usize], kind: LossKind) -> Result<LossOutput> {
    let (m, c) = logits.shape();
    if labels.len() != m {
        return Err(Error::Shape(format!("{} labels for {m} logit rows", labels.len())));
    }
    if m == 0 {
        return Err(Error::Input("loss over an empty batch".into()));
    }
    let classes = match kind {
        LossKind::SoftmaxXent if c >= 2 => c,
        LossKind::Logistic if c == 1 || c == 2 => 2,
        _ => {
            return Err(Error::Shape(format!("{kind:?} loss cannot take {c} logits")));
        }
    };
    if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= classes) {
        return Err(Error::Input(format!(
            "label {y} at row {i} outside class range 0..{classes}"
        )));
    }
    let scale = 1.0 / m as f64;
    let mut grad = Matrix::zeros(m, c);
    let mut total = 0.0;
    match kind {
        LossKind::SoftmaxXent => {
            let mut probs = vec![0.0; c];
            for (r, &y) in labels.iter().enumerate() {
                let row = logits.row(r);
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut z = 0.0;
                for (p, v) in probs.iter_mut().zip(row) {
                    *p = (v - max).exp();
                    z += *p;
                }
                // -log softmax_y = log Σ e^(v - max) - (v_y - max)
                total += z.ln() - (row[y] - max);
                let g = grad.row_mut(r);
                for (j, (gj, p)) in g.iter_mut().zip(&probs).enumerate() {
                    let target = if j == y { 1.0 } else { 0.0 };
                    *gj = (p / z - target) * scale;
                }
            }
        }
        LossKind::Logistic => {
            for (r, &y) in labels.iter().enumerate() {
                let row = logits.row(r);
                let z = if c == 1 { row[0] } else { row[1] - row[0] };
                let y = y as f64;
                total += softplus(z) - y * z;
                let d = (sigmoid(z) - y) * scale;
                if c == 1 {
                    grad.set(r, 0, d);
                } else {
                    grad.set(r, 0, -d);
                    grad.set(r, 1, d);
                }
            }
        }
    }
    Ok(LossOutput {
        value: total * scale,
        grad,
    })
}
