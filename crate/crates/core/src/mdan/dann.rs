//! Single-source domain-adversarial step, written out directly as a
//! reference for the multisource trainer.

use super::config::TrainConfig;
use super::model::MdanModel;
use super::step::{apply_all, domain_labels, step_seed, MdanOptimizer, TARGET_STREAM};
use crate::error::{Error, Result};
use crate::nn::{grad_reverse, loss, Batch, LossKind, Matrix};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DannTrace {
    pub task_loss: f64,
    pub domain_loss: f64,
}

/// One update of a model with exactly one discriminator.
pub fn dann_step(
    model: &mut MdanModel,
    source: &Batch,
    target: &Batch,
    config: &TrainConfig,
    opt: &mut MdanOptimizer,
    step: u64,
) -> Result<DannTrace> {
    if model.k() != 1 || opt.discriminators.len() != 1 {
        return Err(Error::Input("the single-source step needs exactly one discriminator".into()));
    }
    if target.labels.is_some() {
        return Err(Error::Input("target batch must be unlabeled".into()));
    }
    let m = source.len();
    if target.len() != m {
        return Err(Error::Input(format!("batch sizes differ: {m} vs {}", target.len())));
    }
    let seed = step_seed(config.seed, step);
    let labels = source.require_labels()?;

    let xs = model.extractor.forward(&source.features, config.dropout, derive_seed(seed, 0))?;
    let xt = model
        .extractor
        .forward(&target.features, config.dropout, derive_seed(seed, TARGET_STREAM))?;

    let task = model.task_head.forward(&xs.output, 0.0, 0)?;
    let task_loss = loss(&task.output, labels, LossKind::SoftmaxXent)?;
    let task_back = model.task_head.backward(&task, &task_loss.grad)?;

    let joint = Matrix::vstack(&[&xs.output, &xt.output])?;
    let disc = model.discriminators[0].forward(&joint, 0.0, 0)?;
    let domain_loss = loss(&disc.output, &domain_labels(m), LossKind::Logistic)?;
    let disc_back = model.discriminators[0].backward(&disc, &domain_loss.grad)?;

    // The reversal layer sits between the extractor and the discriminator.
    let reversed = grad_reverse(&disc_back.input, config.mu);
    let mut ds = task_back.input;
    ds.add_assign(&reversed.slice_rows(0, m));
    let mut g_ext = model.extractor.backward(&xs, &ds)?.params;
    g_ext.add_assign(&model.extractor.backward(&xt, &reversed.slice_rows(m, 2 * m))?.params);

    let MdanModel {
        extractor,
        task_head,
        discriminators,
    } = model;
    apply_all(vec![
        (extractor, &g_ext, &mut opt.extractor),
        (task_head, &task_back.params, &mut opt.task_head),
        (&mut discriminators[0], &disc_back.params, &mut opt.discriminators[0]),
    ])?;
    Ok(DannTrace {
        task_loss: task_loss.value,
        domain_loss: domain_loss.value,
    })
}
