//! MDAN fixtures shared by the step tests and the acceptance run.

use mdan::mdan::*;
use mdan::nn::{AdamConfig, Batch, Matrix};
use mdan::rng::{derive_seed, stream_rng};
use rand::Rng;

use super::*;

pub fn toy_model(k: usize, seed: u64) -> MdanModel {
    let cfg = ModelConfig {
        input_dim: 2,
        hidden: vec![6, 5],
        num_classes: 2,
        disc_hidden: vec![3],
    };
    MdanModel::new(&cfg, k, seed).unwrap()
}

pub fn batches(k: usize, m: usize, seed: u64) -> (Vec<Batch>, Batch) {
    let mut rng = stream_rng(seed, 77);
    let sources = (0..k)
        .map(|i| {
            let x = random_matrix(&mut rng, m, 2, 1.5 + i as f64);
            let y = (0..m).map(|_| rng.random_range(0..2)).collect();
            Batch::new(x, Some(y), i).unwrap()
        })
        .collect();
    let target = Batch::new(random_matrix(&mut rng, m, 2, 1.5), None, k).unwrap();
    (sources, target)
}

pub fn config(mode: Mode, seed: u64) -> TrainConfig {
    TrainConfig {
        mode,
        gamma: 10.0,
        mu: 0.3,
        lr: 0.01,
        batch_size: 8,
        epochs: 1,
        dropout: 0.3,
        seed,
    }
}

pub fn optimizer(model: &MdanModel) -> MdanOptimizer {
    MdanOptimizer::new(model, AdamConfig::with_lr(0.01))
}

/// Sign pattern of every ReLU in every network for the passes that
/// `domain_scores` performs at dropout seed `seed`.
pub fn model_relu_pattern(model: &MdanModel, sources: &[Batch], target: &Batch, dropout: f64, seed: u64) -> Vec<bool> {
    let ext = model.extractor();
    let t_seed = derive_seed(seed, TARGET_STREAM);
    let mut out = relu_pattern(ext, &target.features, dropout, t_seed);
    let tf = ext.forward(&target.features, dropout, t_seed).unwrap().output;
    for (i, b) in sources.iter().enumerate() {
        let s_seed = derive_seed(seed, i as u64);
        out.extend(relu_pattern(ext, &b.features, dropout, s_seed));
        let sf = ext.forward(&b.features, dropout, s_seed).unwrap().output;
        out.extend(relu_pattern(model.discriminator(i), &Matrix::vstack(&[&sf, &tf]).unwrap(), 0.0, 0));
    }
    out
}

/// Max relative error between the mixture gradient on the shared networks
/// and central differences of the smoothed objective, with the number of
/// probes skipped at ReLU kinks and the number of parameters.
pub fn smoothed_fd_error(seed: u64, k: usize, dropout: f64) -> (f64, usize, usize) {
    let model = toy_model(k, seed);
    let (sources, target) = batches(k, 6, seed);
    let cfg = TrainConfig {
        dropout,
        ..config(Mode::Soft, seed)
    };
    let dseed = step_seed(seed, 0);
    let eval = domain_scores(&model, &sources, &target, cfg.mu, cfg.dropout, dseed).unwrap();
    let w = soft_weights(&eval.scores, cfg.gamma).unwrap();
    let g = step_gradients(&model, &eval, &w, cfg.mu).unwrap();
    let mut worst = 0.0f64;
    let (mut skipped, mut total) = (0, 0);
    for (net, analytic) in [(0, g.extractor.flatten()), (1, g.task_head.flatten())] {
        for (j, a) in analytic.iter().enumerate() {
            total += 1;
            let plus = nudge_model(&model, net, j, FD_STEP);
            let minus = nudge_model(&model, net, j, -FD_STEP);
            if model_relu_pattern(&plus, &sources, &target, dropout, dseed)
                != model_relu_pattern(&minus, &sources, &target, dropout, dseed)
            {
                skipped += 1;
                continue;
            }
            let f = |m: &MdanModel| smoothed_objective(m, &sources, &target, &cfg, dseed).unwrap();
            let numeric = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(*a, numeric));
        }
    }
    (worst, skipped, total)
}
