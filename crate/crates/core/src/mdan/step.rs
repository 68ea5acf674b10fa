//! One training step: domain scores, their mixture gradient, and the
//! hard-max / smoothed updates.
//!
//! The score of source `i` is `task_i − mu · disc_i`, where `task_i` is the
//! task cross-entropy on source `i` and `disc_i` the logistic loss of
//! discriminator `i` separating source-`i` features from target features.
//! Shared parameters descend on a mixture `Σ w_i · ∂score_i/∂θ`; the domain
//! part reaches the extractor through gradient reversal with weight `mu`.
//! Discriminators descend on their own (unweighted) loss.

use serde::Serialize;

use super::config::{Mode, TrainConfig};
use super::model::MdanModel;
use crate::error::{Error, Result};
use crate::nn::{
    grad_reverse, loss, opt_step, AdamConfig, AdamState, Batch, ForwardPass, Gradients, LossKind,
    Matrix, Mlp, Scale,
};
use crate::rng::derive_seed;
use crate::theory::softmax_weights;

/// Dropout stream of the target batch within a step.
pub const TARGET_STREAM: u64 = u64::MAX;
const STEP_STREAM: u64 = 0x57E9;

/// Seed of step `step` in a run seeded with `seed`; dropout for source `i`
/// uses `derive_seed(step_seed, i)`, the target `derive_seed(step_seed, TARGET_STREAM)`.
pub fn step_seed(seed: u64, step: u64) -> u64 {
    derive_seed(derive_seed(seed, STEP_STREAM), step)
}

/// One Adam state per parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct MdanOptimizer {
    pub extractor: AdamState,
    pub task_head: AdamState,
    pub discriminators: Vec<AdamState>,
}

impl MdanOptimizer {
    pub fn new(model: &MdanModel, config: AdamConfig) -> Self {
        Self {
            extractor: AdamState::new(&model.extractor, config),
            task_head: AdamState::new(&model.task_head, config),
            discriminators: model
                .discriminators
                .iter()
                .map(|d| AdamState::new(d, config))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
struct DomainPass {
    extractor: ForwardPass,
    task: ForwardPass,
    task_grad: Matrix,
    disc: ForwardPass,
    disc_grad: Matrix,
}

/// Losses and scores of every source for one set of batches, plus the
/// activations needed to differentiate them.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub task_losses: Vec<f64>,
    pub domain_losses: Vec<f64>,
    pub scores: Vec<f64>,
    m: usize,
    passes: Vec<DomainPass>,
    target: ForwardPass,
}

/// Discriminator labels for `[source rows; target rows]`.
pub(crate) fn domain_labels(m: usize) -> Vec<usize> {
    let mut v = vec![0; m];
    v.resize(2 * m, 1);
    v
}

pub(crate) fn check_batches(k: usize, sources: &[Batch], target: &Batch) -> Result<usize> {
    if sources.len() != k {
        return Err(Error::Input(format!("{} source batches for {k} sources", sources.len())));
    }
    if target.labels.is_some() {
        return Err(Error::Input("target batch must be unlabeled".into()));
    }
    let m = target.len();
    if let Some(b) = sources.iter().find(|b| b.len() != m) {
        return Err(Error::Input(format!(
            "source batch {} has {} rows, target batch has {m}",
            b.domain,
            b.len()
        )));
    }
    Ok(m)
}

/// Forward pass over every source and the target; one extractor pass per batch.
pub fn domain_scores(
    model: &MdanModel,
    sources: &[Batch],
    target: &Batch,
    mu: f64,
    dropout: f64,
    seed: u64,
) -> Result<Evaluation> {
    let m = check_batches(model.k(), sources, target)?;
    let target_pass = model
        .extractor
        .forward(&target.features, dropout, derive_seed(seed, TARGET_STREAM))?;
    let dlabels = domain_labels(m);
    let mut passes = Vec::with_capacity(sources.len());
    let (mut task_losses, mut domain_losses, mut scores) = (vec![], vec![], vec![]);
    for (i, batch) in sources.iter().enumerate() {
        let labels = batch.require_labels()?;
        let ep = model.extractor.forward(&batch.features, dropout, derive_seed(seed, i as u64))?;
        let tp = model.task_head.forward(&ep.output, 0.0, 0)?;
        let tl = loss(&tp.output, labels, LossKind::SoftmaxXent)?;
        let joint = Matrix::vstack(&[&ep.output, &target_pass.output])?;
        let dp = model.discriminators[i].forward(&joint, 0.0, 0)?;
        let dl = loss(&dp.output, &dlabels, LossKind::Logistic)?;
        task_losses.push(tl.value);
        domain_losses.push(dl.value);
        scores.push(tl.value - mu * dl.value);
        passes.push(DomainPass {
            extractor: ep,
            task: tp,
            task_grad: tl.grad,
            disc: dp,
            disc_grad: dl.grad,
        });
    }
    Ok(Evaluation {
        task_losses,
        domain_losses,
        scores,
        m,
        passes,
        target: target_pass,
    })
}

/// Gradients for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGradients {
    /// `Σ w_i ∂score_i/∂θ_extractor`.
    pub extractor: Gradients,
    /// `Σ w_i ∂task_i/∂θ_task`.
    pub task_head: Gradients,
    /// `∂disc_i/∂θ_{disc_i}` per source, unweighted.
    pub discriminators: Vec<Gradients>,
}

/// Mixture gradients for weights `w`; sources with `w_i == 0` add nothing to
/// the shared parameters.
pub fn step_gradients(
    model: &MdanModel,
    eval: &Evaluation,
    weights: &[f64],
    mu: f64,
) -> Result<StepGradients> {
    if weights.len() != eval.passes.len() {
        return Err(Error::Input(format!(
            "{} weights for {} sources",
            weights.len(),
            eval.passes.len()
        )));
    }
    let m = eval.m;
    let mut extractor = Gradients::zeros_like(&model.extractor);
    let mut task_head = Gradients::zeros_like(&model.task_head);
    let mut target_grad = Matrix::zeros(m, model.extractor.output_dim());
    let mut discriminators = Vec::with_capacity(weights.len());
    for (i, (pass, &w)) in eval.passes.iter().zip(weights).enumerate() {
        let db = model.discriminators[i].backward(&pass.disc, &pass.disc_grad)?;
        discriminators.push(db.params);
        if w == 0.0 {
            continue;
        }
        let tb = model.task_head.backward(&pass.task, &pass.task_grad)?;
        task_head.add_assign(&tb.params.scale(w));
        let reversed = grad_reverse(&db.input, mu);
        let mut source_grad = tb.input;
        source_grad.add_assign(&reversed.slice_rows(0, m));
        let eb = model.extractor.backward(&pass.extractor, &source_grad.scale(w))?;
        extractor.add_assign(&eb.params);
        target_grad.add_assign(&reversed.slice_rows(m, 2 * m).scale(w));
    }
    let tb = model.extractor.backward(&eval.target, &target_grad)?;
    extractor.add_assign(&tb.params);
    Ok(StepGradients {
        extractor,
        task_head,
        discriminators,
    })
}

/// One-hot weights at the first maximal score.
pub fn hard_choice(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// `softmax(γ·scores)`.
pub fn soft_weights(scores: &[f64], gamma: f64) -> Result<Vec<f64>> {
    softmax_weights(scores, gamma)
}

/// `(1/γ) · ln Σ exp(γ·score_i)` for the given batches and dropout seed.
pub fn smoothed_objective(
    model: &MdanModel,
    sources: &[Batch],
    target: &Batch,
    config: &TrainConfig,
    seed: u64,
) -> Result<f64> {
    let eval = domain_scores(model, sources, target, config.mu, config.dropout, seed)?;
    crate::theory::lse_max(&eval.scores, config.gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Hard { index: usize },
    Soft { weights: Vec<f64> },
}

/// Record of one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTrace {
    pub step: u64,
    pub task_losses: Vec<f64>,
    pub domain_losses: Vec<f64>,
    pub scores: Vec<f64>,
    pub choice: Choice,
    /// Weighted task loss and weighted domain loss actually optimized.
    pub task_loss: f64,
    pub domain_loss: f64,
}

impl StepTrace {
    /// Weights of the step; one-hot for hard steps.
    pub fn weights(&self) -> Vec<f64> {
        match &self.choice {
            Choice::Soft { weights } => weights.clone(),
            Choice::Hard { index } => {
                let mut w = vec![0.0; self.scores.len()];
                w[*index] = 1.0;
                w
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

fn first_non_finite(g: &Gradients) -> Option<usize> {
    g.layers
        .iter()
        .position(|l| !l.weights.all_finite() || l.bias.iter().any(|b| !b.is_finite()))
}

/// Applies `grads` to every network in `updates`, or to none of them if any
/// gradient is non-finite.
pub(crate) fn apply_all(updates: Vec<(&mut Mlp, &Gradients, &mut AdamState)>) -> Result<()> {
    for (_, g, _) in &updates {
        if let Some(layer) = first_non_finite(g) {
            return Err(Error::NonFinite { layer });
        }
    }
    for (net, g, state) in updates {
        opt_step(net, g, state)?;
    }
    Ok(())
}

fn step_with(
    model: &mut MdanModel,
    sources: &[Batch],
    target: &Batch,
    config: &TrainConfig,
    opt: &mut MdanOptimizer,
    step: u64,
    mode: Mode,
) -> Result<StepTrace> {
    if opt.discriminators.len() != model.k() {
        return Err(Error::Input("optimizer does not match the model".into()));
    }
    let seed = step_seed(config.seed, step);
    let eval = domain_scores(model, sources, target, config.mu, config.dropout, seed)?;
    let (weights, choice) = match mode {
        Mode::Hard => {
            let index = hard_choice(&eval.scores);
            let mut w = vec![0.0; eval.scores.len()];
            w[index] = 1.0;
            (w, Choice::Hard { index })
        }
        Mode::Soft => {
            let w = soft_weights(&eval.scores, config.gamma)?;
            (w.clone(), Choice::Soft { weights: w })
        }
    };
    let grads = step_gradients(model, &eval, &weights, config.mu)?;
    let dot = |v: &[f64]| v.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
    let trace = StepTrace {
        step,
        task_loss: dot(&eval.task_losses),
        domain_loss: dot(&eval.domain_losses),
        task_losses: eval.task_losses,
        domain_losses: eval.domain_losses,
        scores: eval.scores,
        choice,
    };

    let MdanModel {
        extractor,
        task_head,
        discriminators,
    } = model;
    let mut updates: Vec<(&mut Mlp, &Gradients, &mut AdamState)> = vec![
        (extractor, &grads.extractor, &mut opt.extractor),
        (task_head, &grads.task_head, &mut opt.task_head),
    ];
    for (i, ((d, g), s)) in discriminators
        .iter_mut()
        .zip(&grads.discriminators)
        .zip(opt.discriminators.iter_mut())
        .enumerate()
    {
        if weights[i] != 0.0 || mode == Mode::Soft {
            updates.push((d, g, s));
        }
    }
    apply_all(updates)?;
    Ok(trace)
}

/// Hard-max step: only the highest-scoring source contributes, and only its
/// discriminator moves.
pub fn step_hard(
    model: &mut MdanModel,
    sources: &[Batch],
    target: &Batch,
    config: &TrainConfig,
    opt: &mut MdanOptimizer,
    step: u64,
) -> Result<StepTrace> {
    step_with(model, sources, target, config, opt, step, Mode::Hard)
}

/// Smoothed step: shared parameters follow the softmax mixture of all
/// sources; every discriminator moves.
pub fn step_soft(
    model: &mut MdanModel,
    sources: &[Batch],
    target: &Batch,
    config: &TrainConfig,
    opt: &mut MdanOptimizer,
    step: u64,
) -> Result<StepTrace> {
    step_with(model, sources, target, config, opt, step, Mode::Soft)
}

/// Dispatches on `config.mode`.
pub fn step(
    model: &mut MdanModel,
    sources: &[Batch],
    target: &Batch,
    config: &TrainConfig,
    opt: &mut MdanOptimizer,
    step: u64,
) -> Result<StepTrace> {
    step_with(model, sources, target, config, opt, step, config.mode)
}
