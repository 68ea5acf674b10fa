//! Training loops and evaluation.

use super::config::TrainConfig;
use super::dann::{dann_step, DannTrace};
use super::model::MdanModel;
use super::step::{step, step_seed, MdanOptimizer, StepTrace};
use crate::data::{LabeledDomain, MinibatchIter, SingleDomainIter, UnlabeledDomain};
use crate::error::{Error, Result};
use crate::nn::{loss, AdamConfig, LossKind, Matrix, Mlp};
use crate::rng::derive_seed;

const SAMPLER_STREAM: u64 = 0x5A3F;

/// Steps per epoch: enough batches to cover the largest source once.
pub fn steps_per_epoch(sizes: &[usize], batch_size: usize) -> usize {
    sizes.iter().copied().max().unwrap_or(0).div_ceil(batch_size.max(1))
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: MdanModel,
    pub history: Vec<StepTrace>,
}

/// Multisource adversarial training in `config.mode`. The target is used
/// through its features only.
pub fn train(
    model: MdanModel,
    sources: &[LabeledDomain],
    target: &UnlabeledDomain,
    config: &TrainConfig,
) -> Result<TrainOutput> {
    config.validate()?;
    if sources.len() != model.k() {
        return Err(Error::Input(format!(
            "{} sources for a model with {} discriminators",
            sources.len(),
            model.k()
        )));
    }
    let mut model = model;
    let mut opt = MdanOptimizer::new(&model, AdamConfig::with_lr(config.lr));
    let sizes: Vec<usize> = sources.iter().map(LabeledDomain::len).collect();
    let total = config.epochs * steps_per_epoch(&sizes, config.batch_size);
    let batches = MinibatchIter::for_domains(
        sources,
        target,
        config.batch_size,
        derive_seed(config.seed, SAMPLER_STREAM),
    );
    let mut history = Vec::with_capacity(total);
    for (t, idx) in batches.take(total).enumerate() {
        let (sb, tb) = idx.materialize(sources, target);
        history.push(step(&mut model, &sb, &tb, config, &mut opt, t as u64)?);
    }
    Ok(TrainOutput { model, history })
}

/// Single-source adversarial training (`model` must have one discriminator).
pub fn train_dann(
    model: MdanModel,
    source: &LabeledDomain,
    target: &UnlabeledDomain,
    config: &TrainConfig,
) -> Result<(MdanModel, Vec<DannTrace>)> {
    config.validate()?;
    let mut model = model;
    let mut opt = MdanOptimizer::new(&model, AdamConfig::with_lr(config.lr));
    let total = config.epochs * steps_per_epoch(&[source.len()], config.batch_size);
    let batches = MinibatchIter::for_domains(
        std::slice::from_ref(source),
        target,
        config.batch_size,
        derive_seed(config.seed, SAMPLER_STREAM),
    );
    let mut history = Vec::with_capacity(total);
    for (t, idx) in batches.take(total).enumerate() {
        let (sb, tb) = idx.materialize(std::slice::from_ref(source), target);
        history.push(dann_step(&mut model, &sb[0], &tb, config, &mut opt, t as u64)?);
    }
    Ok((model, history))
}

/// Plain supervised training of extractor and task head; discriminators are
/// left untouched. Returns the model and the per-step task loss.
pub fn train_source_only(
    model: MdanModel,
    source: &LabeledDomain,
    config: &TrainConfig,
) -> Result<(MdanModel, Vec<f64>)> {
    config.validate()?;
    let mut model = model;
    let mut opt = MdanOptimizer::new(&model, AdamConfig::with_lr(config.lr));
    let total = config.epochs * steps_per_epoch(&[source.len()], config.batch_size);
    let iter = SingleDomainIter::new(
        source.len(),
        config.batch_size,
        derive_seed(config.seed, SAMPLER_STREAM),
    );
    let mut losses = Vec::with_capacity(total);
    for (t, idx) in iter.take(total).enumerate() {
        let batch = source.batch(&idx);
        let seed = derive_seed(step_seed(config.seed, t as u64), 0);
        let ep = model.extractor.forward(&batch.features, config.dropout, seed)?;
        let tp = model.task_head.forward(&ep.output, 0.0, 0)?;
        let tl = loss(&tp.output, batch.require_labels()?, LossKind::SoftmaxXent)?;
        let tb = model.task_head.backward(&tp, &tl.grad)?;
        let eb = model.extractor.backward(&ep, &tb.input)?;
        let MdanModel {
            extractor,
            task_head,
            ..
        } = &mut model;
        let updates: Vec<(&mut Mlp, _, _)> = vec![
            (extractor, &eb.params, &mut opt.extractor),
            (task_head, &tb.params, &mut opt.task_head),
        ];
        super::step::apply_all(updates)?;
        losses.push(tl.value);
    }
    Ok((model, losses))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Accuracy,
    Mae,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Mae => "mae",
        }
    }
}

/// Arg-max class per row.
pub fn predict(model: &MdanModel, features: &Matrix) -> Result<Vec<usize>> {
    let logits = model.logits(features)?;
    Ok(logits
        .iter_rows()
        .map(|r| {
            let mut best = 0;
            for (j, v) in r.iter().enumerate() {
                if *v > r[best] {
                    best = j;
                }
            }
            best
        })
        .collect())
}

/// Accuracy of predicted classes, or mean absolute error between predicted
/// and true class indices (for ordinal labels such as counts).
pub fn evaluate(model: &MdanModel, data: &LabeledDomain, metric: Metric) -> Result<f64> {
    let classes = model.num_classes();
    if let Some(y) = data.labels().iter().find(|&&y| y >= classes) {
        return Err(Error::Input(format!(
            "label {y} outside the model's {classes} classes"
        )));
    }
    let pred = predict(model, data.features())?;
    Ok(score(&pred, data.labels(), metric))
}

pub fn score(pred: &[usize], truth: &[usize], metric: Metric) -> f64 {
    let n = truth.len().max(1) as f64;
    match metric {
        Metric::Accuracy => pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / n,
        Metric::Mae => {
            pred.iter()
                .zip(truth)
                .map(|(&p, &t)| (p as f64 - t as f64).abs())
                .sum::<f64>()
                / n
        }
    }
}
