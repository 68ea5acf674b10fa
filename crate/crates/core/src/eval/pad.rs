//! Proxy A-distance with a linear logistic probe.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{loss, opt_step, Activation, AdamConfig, AdamState, Dense, LossKind, Matrix, Mlp, Role};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Full-batch optimizer steps.
    pub iters: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            iters: 300,
            lr: 0.05,
            seed: 0,
        }
    }
}

fn split_half(n: usize, seed: u64, stream: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, stream));
    let held = idx.split_off(n / 2);
    (idx, held)
}

/// `2 · (1 − 2·err)` clamped to `[0, 2]`, where `err` is the balanced held-out
/// error of a logistic classifier separating `a` (label 0) from `b` (label 1).
///
/// Each sample is split in half at random; the probe is trained on the first
/// halves with features standardized by the training statistics.
pub fn pad(a: &Matrix, b: &Matrix, probe: &ProbeConfig) -> Result<f64> {
    if a.rows() < 2 || b.rows() < 2 {
        return Err(Error::Input("each domain needs at least two points for a train/held-out split".into()));
    }
    if a.cols() != b.cols() {
        return Err(Error::Input(format!("dimension mismatch: {} vs {}", a.cols(), b.cols())));
    }
    let (a_train, a_held) = split_half(a.rows(), probe.seed, 0);
    let (b_train, b_held) = split_half(b.rows(), probe.seed, 1);
    let train = Matrix::vstack(&[&a.select_rows(&a_train), &b.select_rows(&b_train)])?;
    let mut labels = vec![0; a_train.len()];
    labels.resize(a_train.len() + b_train.len(), 1);

    let dim = a.cols();
    let n = train.rows() as f64;
    let mut mean = vec![0.0; dim];
    for r in train.iter_rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut sd = vec![0.0; dim];
    for r in train.iter_rows() {
        for ((s, v), m) in sd.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    let sd: Vec<f64> = sd.into_iter().map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 }).collect();
    let standardize = |x: &Matrix| {
        let mut out = x.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&mean).zip(&sd) {
                *v = (*v - m) / s;
            }
        }
        out
    };

    let train = standardize(&train);
    let layer = Dense::new(Matrix::zeros(1, dim), vec![0.0], Activation::Identity)?;
    let mut net = Mlp::new(Role::Discriminator, vec![layer])?;
    let mut state = AdamState::new(&net, AdamConfig::with_lr(probe.lr));
    for _ in 0..probe.iters {
        let pass = net.forward(&train, 0.0, 0)?;
        let l = loss(&pass.output, &labels, LossKind::Logistic)?;
        let g = net.backward(&pass, &l.grad)?;
        opt_step(&mut net, &g.params, &mut state)?;
    }

    let error_rate = |x: &Matrix, positive: bool| -> Result<f64> {
        let z = net.predict(&standardize(x))?;
        let wrong = z.as_slice().iter().filter(|&&v| (v > 0.0) != positive).count();
        Ok(wrong as f64 / x.rows() as f64)
    };
    let err = 0.5 * (error_rate(&a.select_rows(&a_held), false)? + error_rate(&b.select_rows(&b_held), true)?);
    Ok((2.0 * (1.0 - 2.0 * err)).clamp(0.0, 2.0))
}

/// Source indices ordered by ascending PAD; equal values keep index order.
pub fn rank_sources(pads: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pads.len()).collect();
    idx.sort_by(|&i, &j| pads[i].total_cmp(&pads[j]));
    idx
}

#[derive(Debug, Clone, PartialEq)]
pub struct PadReport {
    pub pads: Vec<f64>,
    pub ranking: Vec<usize>,
}

impl PadReport {
    pub fn new(pads: Vec<f64>) -> Self {
        let ranking = rank_sources(&pads);
        Self { pads, ranking }
    }

    /// `source,pad,rank` rows, where `rank` is the 0-based position in the ranking.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,pad,rank\n");
        for (i, p) in self.pads.iter().enumerate() {
            let rank = self.ranking.iter().position(|&r| r == i).unwrap();
            out.push_str(&format!("{i},{p},{rank}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_examples() {
        assert_eq!(rank_sources(&[0.4, 0.1, 0.9]), vec![1, 0, 2]);
        assert_eq!(rank_sources(&[0.5; 4]), vec![0, 1, 2, 3]);
        assert_eq!(rank_sources(&[3.0, 2.0, 1.0]), vec![2, 1, 0]);
    }

    #[test]
    fn degenerate_domains_rejected() {
        let one = Matrix::column(&[0.0]);
        let two = Matrix::column(&[0.0, 1.0]);
        assert!(pad(&one, &two, &ProbeConfig::default()).is_err());
    }

    #[test]
    fn separated_points() {
        let a = Matrix::column(&[0.0, 0.1, 0.2, 0.3]);
        let b = Matrix::column(&[5.0, 5.1, 5.2, 5.3]);
        assert_eq!(pad(&a, &b, &ProbeConfig::default()).unwrap(), 2.0);
    }
}
