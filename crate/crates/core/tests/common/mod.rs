//! Test-side oracles shared by the integration suites. Nothing here calls the
//! code under test to compute an expected value.
#![allow(dead_code)]

use mdan::data::LabeledDomain;
use mdan::mdan::MdanModel;
use mdan::nn::{loss, Activation, LossKind, Matrix, Mlp, Role};
use mdan::rng::stream_rng;
use rand::Rng;

pub mod fixtures;

pub const FD_STEP: f64 = 1e-5;

/// Relative error with an absolute floor so that near-zero entries are
/// compared absolutely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Glorot network with non-zero random biases so every unit is exercised.
pub fn random_mlp<R: Rng>(rng: &mut R, dims: &[usize], output: Activation) -> Mlp {
    let mut net = Mlp::glorot(Role::Task, dims, output, rng).unwrap();
    for l in net.layers_mut() {
        for b in &mut l.bias {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    net
}

/// Flattened parameters in the same order as `Gradients::flatten`.
pub fn flatten(net: &Mlp) -> Vec<f64> {
    let mut out = Vec::new();
    for l in net.layers() {
        out.extend_from_slice(l.weights.as_slice());
        out.extend_from_slice(&l.bias);
    }
    out
}

/// Adds `delta` to flat parameter `j`.
pub fn nudge(net: &mut Mlp, mut j: usize, delta: f64) {
    for l in net.layers_mut() {
        let w = l.weights.as_slice().len();
        if j < w {
            l.weights.as_mut_slice()[j] += delta;
            return;
        }
        j -= w;
        if j < l.bias.len() {
            l.bias[j] += delta;
            return;
        }
        j -= l.bias.len();
    }
    panic!("parameter index out of range");
}

/// Sign pattern of every ReLU pre-activation; a change between the two FD
/// probes means the probe straddled a kink.
pub fn relu_pattern(net: &Mlp, x: &Matrix, dropout: f64, seed: u64) -> Vec<bool> {
    let pass = net.forward(x, dropout, seed).unwrap();
    net.layers()
        .iter()
        .zip(&pass.pre)
        .filter(|(l, _)| l.activation == Activation::Relu)
        .flat_map(|(_, z)| z.as_slice().iter().map(|v| *v > 0.0).collect::<Vec<_>>())
        .collect()
}

/// Max relative error between `backward` and central differences of the
/// mean loss over every parameter, skipping probes that cross a ReLU kink.
/// Returns `(max_rel_err, skipped, total)`.
pub fn mlp_fd_check(net: &Mlp, x: &Matrix, labels: &[usize], kind: LossKind) -> (f64, usize, usize) {
    let pass = net.forward(x, 0.0, 0).unwrap();
    let l = loss(&pass.output, labels, kind).unwrap();
    let analytic = net.backward(&pass, &l.grad).unwrap().params.flatten();
    let value = |n: &Mlp| loss(&n.forward(x, 0.0, 0).unwrap().output, labels, kind).unwrap().value;
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for (j, a) in analytic.iter().enumerate() {
        let mut plus = net.clone();
        nudge(&mut plus, j, FD_STEP);
        let mut minus = net.clone();
        nudge(&mut minus, j, -FD_STEP);
        if relu_pattern(&plus, x, 0.0, 0) != relu_pattern(&minus, x, 0.0, 0) {
            skipped += 1;
            continue;
        }
        let numeric = (value(&plus) - value(&minus)) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(*a, numeric));
    }
    (worst, skipped, analytic.len())
}

/// Rebuilds a model with flat parameter `j` of network `net` nudged.
pub fn nudge_model(model: &MdanModel, net: usize, j: usize, delta: f64) -> MdanModel {
    let mut nets: Vec<Mlp> = model.networks().into_iter().cloned().collect();
    nudge(&mut nets[net], j, delta);
    MdanModel::from_networks(nets).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// All parameters of all networks of a model, flattened.
pub fn model_params(model: &MdanModel) -> Vec<f64> {
    model.networks().into_iter().flat_map(flatten).collect()
}

/// Random labeled domain of `n` points with integer-valued coordinates in
/// `0..span` (so ties and duplicate rows occur) and binary labels.
pub fn random_labeled(seed: u64, stream: u64, n: usize, dim: usize, span: i32) -> LabeledDomain {
    let mut rng = stream_rng(seed, stream);
    let data = (0..n * dim).map(|_| rng.random_range(0..span) as f64).collect();
    let labels = (0..n).map(|_| rng.random_range(0..2)).collect();
    LabeledDomain::new(stream as usize, Matrix::from_vec(n, dim, data).unwrap(), labels).unwrap()
}

/// Two-sided signed-rank p-value by enumerating all `2^n` sign assignments
/// of the non-zero differences, with average ranks for ties.
pub fn wilcoxon_enumeration_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    // average rank = 1 + #smaller + (#equal - 1) / 2
    let ranks: Vec<f64> = abs
        .iter()
        .map(|x| {
            let smaller = abs.iter().filter(|y| *y < x).count() as f64;
            let equal = abs.iter().filter(|y| *y == x).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect();
    let observed: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (2.0 * le.min(ge) as f64 / total).min(1.0)
}
