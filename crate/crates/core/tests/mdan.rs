mod common;

use common::fixtures::*;
use common::*;
use mdan::data::{generate, LabeledDomain, MultiDomain, SyntheticSpec, UnlabeledDomain};
use mdan::mdan::*;
use mdan::nn::{Activation, Batch, Dense, Matrix, Mlp, Role};
use proptest::prelude::*;

#[test]
fn single_source_steps_coincide_with_dann() {
    for seed in 0..5 {
        let start = toy_model(1, seed);
        let cfg = config(Mode::Hard, seed);
        let (mut hard, mut soft, mut dann) = (start.clone(), start.clone(), start);
        let (mut oh, mut os, mut od) = (optimizer(&hard), optimizer(&soft), optimizer(&dann));
        for t in 0..4 {
            let (s, tgt) = batches(1, 8, seed * 10 + t);
            step_hard(&mut hard, &s, &tgt, &cfg, &mut oh, t).unwrap();
            step_soft(&mut soft, &s, &tgt, &cfg, &mut os, t).unwrap();
            dann_step(&mut dann, &s[0], &tgt, &cfg, &mut od, t).unwrap();
        }
        let p = model_params(&dann);
        assert!(max_abs_diff(&model_params(&hard), &p) < 1e-12);
        assert!(max_abs_diff(&model_params(&soft), &p) < 1e-12);
    }
}

#[test]
fn mixture_gradient_is_the_smoothed_objective_gradient() {
    for seed in 0..10 {
        let (err, skipped, total) = smoothed_fd_error(seed, 3, if seed % 2 == 0 { 0.0 } else { 0.4 });
        assert!(err < 1e-3, "seed {seed}: rel err {err}");
        assert!(skipped * 10 <= total, "seed {seed}: {skipped} of {total} probes hit a kink");
    }
}

#[test]
fn reversal_contribution_is_linear_in_mu() {
    let model = toy_model(1, 4);
    let (s, t) = batches(1, 8, 4);
    let grad = |mu: f64| {
        let eval = domain_scores(&model, &s, &t, mu, 0.0, 0).unwrap();
        step_gradients(&model, &eval, &[1.0], mu).unwrap().extractor.flatten()
    };
    let (g0, g1, g2) = (grad(0.0), grad(0.1), grad(0.2));
    for ((a, b), c) in g0.iter().zip(&g1).zip(&g2) {
        assert!(((c - a) - 2.0 * (b - a)).abs() < 1e-9);
    }
}

#[test]
fn zero_mu_hard_step_is_plain_task_descent() {
    let model = toy_model(2, 6);
    let (s, t) = batches(2, 8, 6);
    let eval = domain_scores(&model, &s, &t, 0.0, 0.0, 0).unwrap();
    let i = hard_choice(&eval.scores);
    let mut w = vec![0.0; 2];
    w[i] = 1.0;
    let g = step_gradients(&model, &eval, &w, 0.0).unwrap();

    let ext = model.extractor();
    let pass = ext.forward(&s[i].features, 0.0, 0).unwrap();
    let head = model.task_head().forward(&pass.output, 0.0, 0).unwrap();
    let l = mdan::nn::loss(&head.output, s[i].labels.as_ref().unwrap(), mdan::nn::LossKind::SoftmaxXent).unwrap();
    let hb = model.task_head().backward(&head, &l.grad).unwrap();
    let eb = ext.backward(&pass, &hb.input).unwrap();
    assert!(max_abs_diff(&g.extractor.flatten(), &eb.params.flatten()) < 1e-12);
    assert!(max_abs_diff(&g.task_head.flatten(), &hb.params.flatten()) < 1e-12);
}

/// Two sources; source 2 sits far from the target and carries labels the
/// current model gets wrong, so its score dominates.
fn dominated_instance(seed: u64) -> (MdanModel, Vec<Batch>, Batch) {
    let model = toy_model(2, seed);
    let (mut s, t) = batches(2, 8, seed);
    s[0].features = t.features.clone();
    s[0].labels = Some(predict(&model, &s[0].features).unwrap());
    let mut far = t.features.clone();
    for v in far.as_mut_slice() {
        *v += 25.0;
    }
    let wrong = predict(&model, &far).unwrap().iter().map(|y| 1 - y).collect();
    s[1] = Batch::new(far, Some(wrong), 1).unwrap();
    (model, s, t)
}

#[test]
fn hard_step_moves_only_the_selected_discriminator() {
    for seed in 0..5 {
        let (mut model, s, t) = dominated_instance(seed);
        let before = model.clone();
        let cfg = TrainConfig { dropout: 0.0, ..config(Mode::Hard, seed) };
        let mut opt = optimizer(&model);
        let trace = step_hard(&mut model, &s, &t, &cfg, &mut opt, 0).unwrap();
        assert_eq!(trace.choice, Choice::Hard { index: 1 });
        assert!(trace.scores[1] > trace.scores[0]);
        assert_eq!(model.discriminator(0), before.discriminator(0));
        assert_ne!(model.discriminator(1), before.discriminator(1));
        assert_ne!(model.extractor(), before.extractor());
        assert_ne!(model.task_head(), before.task_head());
    }
}

#[test]
fn dominant_soft_step_approaches_hard_step() {
    let (model, s, t) = dominated_instance(2);
    let cfg = TrainConfig {
        gamma: 1e3,
        dropout: 0.0,
        ..config(Mode::Soft, 2)
    };
    let eval = domain_scores(&model, &s, &t, cfg.mu, 0.0, 0).unwrap();
    assert!((eval.scores[1] - eval.scores[0]) * cfg.gamma > 50.0 * 2f64.ln());
    let (mut hard, mut soft) = (model.clone(), model.clone());
    let (mut oh, mut os) = (optimizer(&hard), optimizer(&soft));
    step_hard(&mut hard, &s, &t, &cfg, &mut oh, 0).unwrap();
    step_soft(&mut soft, &s, &t, &cfg, &mut os, 0).unwrap();
    for net in 0..2 {
        let d = max_abs_diff(&flatten(hard.networks()[net]), &flatten(soft.networks()[net]));
        assert!(d < 1e-6, "network {net} differs by {d}");
    }
    assert_eq!(hard.discriminator(1), soft.discriminator(1));
}

#[test]
fn indistinguishable_domains_give_ln2_discriminator_loss() {
    let base = toy_model(2, 1);
    let discs = base
        .discriminators()
        .iter()
        .map(|d| {
            let mut layers = d.layers().to_vec();
            let last = layers.last_mut().unwrap();
            *last = Dense::new(Matrix::zeros(1, last.input_dim()), vec![0.0], Activation::Identity).unwrap();
            Mlp::new(Role::Discriminator, layers).unwrap()
        })
        .collect();
    let model = MdanModel::from_parts(base.extractor().clone(), base.task_head().clone(), discs).unwrap();
    let (mut s, t) = batches(2, 8, 1);
    for b in &mut s {
        b.features = t.features.clone();
    }
    let eval = domain_scores(&model, &s, &t, 0.1, 0.0, 0).unwrap();
    for l in &eval.domain_losses {
        assert!((l - 2f64.ln()).abs() < 1e-15);
    }
}

#[test]
fn scores_match_straight_line_recomputation() {
    let model = toy_model(2, 8);
    let (s, t) = batches(2, 5, 8);
    let mu = 0.25;
    let eval = domain_scores(&model, &s, &t, mu, 0.0, 0).unwrap();
    let tf = model.features(&t.features).unwrap();
    for (i, b) in s.iter().enumerate() {
        let logits = model.logits(&b.features).unwrap();
        let labels = b.labels.as_ref().unwrap();
        let task: f64 = logits
            .iter_rows()
            .zip(labels)
            .map(|(z, y)| {
                let lse = z.iter().map(|v| v.exp()).sum::<f64>().ln();
                lse - z[*y]
            })
            .sum::<f64>()
            / labels.len() as f64;
        let sf = model.features(&b.features).unwrap();
        let ds = model.discriminator(i).predict(&sf).unwrap();
        let dt = model.discriminator(i).predict(&tf).unwrap();
        // source rows carry domain label 0, target rows label 1
        let disc: f64 = (ds.as_slice().iter().map(|z| (1.0 + z.exp()).ln()).sum::<f64>()
            + dt.as_slice().iter().map(|z| (1.0 + (-z).exp()).ln()).sum::<f64>())
            / (2 * labels.len()) as f64;
        assert!((eval.task_losses[i] - task).abs() < 1e-12);
        assert!((eval.domain_losses[i] - disc).abs() < 1e-12);
        assert!((eval.scores[i] - (task - mu * disc)).abs() < 1e-12);
    }
}

#[test]
fn batch_size_mismatch_and_labeled_target_are_rejected() {
    let model = toy_model(2, 0);
    let (s, t) = batches(2, 8, 0);
    let (short, _) = batches(2, 4, 0);
    assert!(domain_scores(&model, &[s[0].clone(), short[1].clone()], &t, 0.1, 0.0, 0).is_err());
    let labeled = Batch::new(t.features.clone(), Some(vec![0; 8]), 2).unwrap();
    assert!(domain_scores(&model, &s, &labeled, 0.1, 0.0, 0).is_err());
}

#[test]
fn frozen_soft_weights() {
    let w = soft_weights(&[0.1, 0.2], 10.0).unwrap();
    assert!((w[0] - 0.268_941_421_369_995_1).abs() < 1e-15);
    assert!((w[1] - 0.731_058_578_630_004_9).abs() < 1e-15);
}

fn moons(angles_deg: &[f64], n: usize, seed: u64) -> MultiDomain {
    let rad: Vec<f64> = angles_deg.iter().map(|a| a.to_radians()).collect();
    generate(&SyntheticSpec::rotated_moons(&rad, n, 0.1, seed)).unwrap()
}

fn desk_model(k: usize, seed: u64) -> MdanModel {
    let cfg = ModelConfig {
        input_dim: 2,
        hidden: vec![32, 16],
        num_classes: 2,
        disc_hidden: vec![8],
    };
    MdanModel::new(&cfg, k, seed).unwrap()
}

#[test]
fn training_is_deterministic_and_traces_are_consistent() {
    let data = moons(&[0.0, 20.0, 30.0], 60, 1);
    for mode in [Mode::Hard, Mode::Soft] {
        let cfg = TrainConfig { epochs: 2, batch_size: 16, ..config(mode, 3) };
        let a = train(desk_model(2, 3), &data.sources, &data.target, &cfg).unwrap();
        let b = train(desk_model(2, 3), &data.sources, &data.target, &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.history, b.history);
        assert_eq!(a.history.len(), 2 * steps_per_epoch(&[60, 60], 16));
        for t in &a.history {
            match &t.choice {
                Choice::Hard { index } => assert_eq!(*index, hard_choice(&t.scores)),
                Choice::Soft { weights } => {
                    assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                    assert!(weights.iter().all(|w| *w >= 0.0));
                }
            }
        }
    }
}

#[test]
fn zero_epochs_return_the_model_unchanged() {
    let data = moons(&[0.0, 10.0], 30, 2);
    let cfg = TrainConfig { epochs: 0, ..config(Mode::Soft, 0) };
    let out = train(desk_model(1, 0), &data.sources, &data.target, &cfg).unwrap();
    assert_eq!(out.model, desk_model(1, 0));
    assert!(out.history.is_empty());
}

#[test]
fn no_shift_transfers_source_accuracy() {
    let mut gaps = Vec::new();
    for seed in 0..5 {
        let data = moons(&[0.0, 0.0, 0.0], 300, seed);
        let cfg = TrainConfig {
            epochs: 10,
            batch_size: 32,
            lr: 1e-3,
            mu: 0.1,
            dropout: 0.0,
            ..config(Mode::Soft, seed)
        };
        let out = train(desk_model(2, seed), &data.sources, &data.target, &cfg).unwrap();
        let src = evaluate(&out.model, &LabeledDomain::concat(&data.sources).unwrap(), Metric::Accuracy).unwrap();
        let tgt = evaluate(&out.model, &data.target.oracle().unwrap(), Metric::Accuracy).unwrap();
        gaps.push((src - tgt).abs());
    }
    gaps.sort_by(f64::total_cmp);
    assert!(gaps[2] < 0.05, "median gap {}", gaps[2]);
}

#[test]
fn far_source_pulls_soft_weights_off_uniform() {
    let data = moons(&[0.0, 10.0, 150.0, 20.0], 200, 5);
    let cfg = TrainConfig {
        epochs: 6,
        batch_size: 32,
        lr: 1e-3,
        mu: 1.0,
        dropout: 0.0,
        gamma: 10.0,
        ..config(Mode::Soft, 5)
    };
    let out = train(desk_model(3, 5), &data.sources, &data.target, &cfg).unwrap();
    let tv = |t: &StepTrace| t.weights().iter().map(|w| (w - 1.0 / 3.0).abs()).sum::<f64>() / 2.0;
    let n = out.history.len();
    let early: f64 = out.history[..5].iter().map(tv).sum::<f64>() / 5.0;
    let late_steps = &out.history[n - n / 4..];
    let late: f64 = late_steps.iter().map(tv).sum::<f64>() / late_steps.len() as f64;
    assert!(late > early, "late {late} vs early {early}");
    let mut mean = [0.0; 3];
    for t in late_steps {
        for (m, w) in mean.iter_mut().zip(t.weights()) {
            *m += w;
        }
    }
    assert_eq!(hard_choice(&mean), 2, "mean late weights {mean:?}");
}

fn constant_model(class: usize) -> MdanModel {
    let ext = Mlp::new(Role::Extractor, vec![Dense::new(Matrix::zeros(2, 2), vec![0.0; 2], Activation::Relu).unwrap()]).unwrap();
    let mut bias = vec![0.0; 3];
    bias[class] = 1.0;
    let task = Mlp::new(Role::Task, vec![Dense::new(Matrix::zeros(3, 2), bias, Activation::Identity).unwrap()]).unwrap();
    let disc = Mlp::new(Role::Discriminator, vec![Dense::new(Matrix::zeros(1, 2), vec![0.0], Activation::Identity).unwrap()]).unwrap();
    MdanModel::from_parts(ext, task, vec![disc]).unwrap()
}

#[test]
fn metrics_by_hand() {
    let x = Matrix::from_vec(10, 2, (0..20).map(f64::from).collect()).unwrap();
    let labels = vec![1, 1, 0, 1, 2, 1, 1, 0, 0, 1];
    let d = LabeledDomain::new(0, x, labels).unwrap();
    let m = constant_model(1);
    // six of the ten labels are 1
    assert_eq!(evaluate(&m, &d, Metric::Accuracy).unwrap(), 0.6);
    // |1-0| three times and |1-2| once
    assert_eq!(evaluate(&m, &d, Metric::Mae).unwrap(), 0.4);
    let constant = LabeledDomain::new(0, d.features().clone(), vec![2; 10]).unwrap();
    assert_eq!(evaluate(&constant_model(2), &constant, Metric::Accuracy).unwrap(), 1.0);
    assert_eq!(evaluate(&constant_model(2), &constant, Metric::Mae).unwrap(), 0.0);
    let too_big = LabeledDomain::new(0, d.features().clone(), vec![3; 10]).unwrap();
    assert!(evaluate(&m, &too_big, Metric::Accuracy).is_err());
}

#[test]
fn training_source_smaller_than_batch() {
    let data = moons(&[0.0, 10.0], 5, 3);
    let target = UnlabeledDomain::new(9, data.target.features().clone()).unwrap();
    let cfg = TrainConfig { epochs: 1, batch_size: 16, ..config(Mode::Hard, 0) };
    let out = train(desk_model(1, 0), &data.sources, &target, &cfg).unwrap();
    assert_eq!(out.history.len(), 1);
}

proptest! {
    #[test]
    fn soft_weight_properties(v in prop::collection::vec(-5.0f64..5.0, 1..8), gamma in 1e-2f64..1e2, shift in -10.0f64..10.0) {
        let w = soft_weights(&v, gamma).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|x| *x >= 0.0));
        prop_assert_eq!(hard_choice(&w), hard_choice(&v));
        let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
        let ws = soft_weights(&shifted, gamma).unwrap();
        prop_assert!(max_abs_diff(&w, &ws) < 1e-12);
    }
}
