//! Dense feed-forward networks with exact reverse-mode gradients.
//!
//! A layer computes `a = act(x Wᵀ + b)` with `W` stored row-major as
//! `out × in`. Dropout (inverted, rate `p`) is applied to the output of every
//! ReLU layer during training; identity layers are never dropped, so logits
//! are left untouched.

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// What a network is used for inside a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Extractor,
    Task,
    Discriminator,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Extractor => "extractor",
            Role::Task => "task",
            Role::Discriminator => "discriminator",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "extractor" => Some(Role::Extractor),
            "task" => Some(Role::Task),
            "discriminator" => Some(Role::Discriminator),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out × in`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Shape(format!(
                "bias of length {} for {} output units",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot<R: Rng + ?Sized>(
        input: usize,
        output: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (input + output) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite glorot limit");
        let data = (0..input * output).map(|_| dist.sample(rng)).collect();
        Self {
            weights: Matrix::from_vec(output, input, data).expect("sized buffer"),
            bias: vec![0.0; output],
            activation,
        }
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    #[inline]
    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// Network parameters: an ordered chain of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    role: Role,
    layers: Vec<Dense>,
}

impl Mlp {
    pub fn new(role: Role, layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::Shape(format!(
                    "layer {i} outputs {} units but layer {} expects {}",
                    pair[0].output_dim(),
                    i + 1,
                    pair[1].input_dim()
                )));
            }
        }
        Ok(Self { role, layers })
    }

    /// Glorot-initialized chain through `dims` (`dims[0]` is the input width).
    /// Hidden layers use ReLU; the last layer uses `output`.
    pub fn glorot<R: Rng + ?Sized>(
        role: Role,
        dims: &[usize],
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid layer widths {dims:?}")));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last { output } else { Activation::Relu };
                Dense::glorot(w[0], w[1], act, rng)
            })
            .collect();
        Self::new(role, layers)
    }

    #[inline]
    pub fn role(&self) -> Role {
        self.role
    }

    #[inline]
    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    #[inline]
    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.all_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    /// Runs the network on a batch of rows and keeps everything `backward` needs.
    ///
    /// The dropout mask is a pure function of `seed`; `dropout_rate == 0`
    /// disables it entirely.
    pub fn forward(&self, input: &Matrix, dropout_rate: f64, seed: u64) -> Result<ForwardPass> {
        if input.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                input.cols(),
                self.input_dim()
            )));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::Input(format!(
                "dropout rate {dropout_rate} outside [0, 1)"
            )));
        }
        let mut rng = stream_rng(seed, 0x0D80);
        let keep = 1.0 - dropout_rate;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut masks = Vec::with_capacity(self.layers.len());
        let mut current = input.clone();
        for layer in &self.layers {
            let mut z = current.matmul_transposed(&layer.weights);
            for r in 0..z.rows() {
                for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }
            let mut a = z.clone();
            let mut mask = None;
            if layer.activation == Activation::Relu {
                for v in a.as_mut_slice() {
                    *v = v.max(0.0);
                }
                if dropout_rate > 0.0 {
                    let m: Vec<f64> = (0..a.as_slice().len())
                        .map(|_| {
                            if rng.random::<f64>() < keep {
                                1.0 / keep
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    for (v, s) in a.as_mut_slice().iter_mut().zip(&m) {
                        *v *= s;
                    }
                    mask = Some(m);
                }
            }
            inputs.push(current);
            pre.push(z);
            masks.push(mask);
            current = a;
        }
        Ok(ForwardPass {
            inputs,
            pre,
            masks,
            output: current,
        })
    }

    /// Inference forward pass (no dropout), returning only the output.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        Ok(self.forward(input, 0.0, 0)?.output)
    }

    /// Reverse-mode gradients for `grad_output = ∂L/∂output`.
    pub fn backward(&self, pass: &ForwardPass, grad_output: &Matrix) -> Result<Backprop> {
        if pass.inputs.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "forward pass has {} layers, network has {}",
                pass.inputs.len(),
                self.layers.len()
            )));
        }
        if grad_output.shape() != pass.output.shape() {
            return Err(Error::Shape(format!(
                "output gradient is {:?}, output is {:?}",
                grad_output.shape(),
                pass.output.shape()
            )));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = grad_output.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if pass.inputs[l].cols() != layer.input_dim() {
                return Err(Error::Shape(format!("activation/parameter mismatch at layer {l}")));
            }
            if let Some(mask) = &pass.masks[l] {
                for (d, s) in delta.as_mut_slice().iter_mut().zip(mask) {
                    *d *= s;
                }
            }
            if layer.activation == Activation::Relu {
                for (d, z) in delta.as_mut_slice().iter_mut().zip(pass.pre[l].as_slice()) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let weights = delta.transposed_matmul(&pass.inputs[l]);
            let bias = delta.sum_rows();
            let next = delta.matmul(&layer.weights);
            grads.push(LayerGrad { weights, bias });
            delta = next;
        }
        grads.reverse();
        Ok(Backprop {
            params: Gradients { layers: grads },
            input: delta,
        })
    }
}

/// Cached intermediates from [`Mlp::forward`].
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Input to each layer (post-dropout output of the previous one).
    pub inputs: Vec<Matrix>,
    /// Pre-activations `x Wᵀ + b` per layer.
    pub pre: Vec<Matrix>,
    /// Scaled keep masks for layers where dropout fired.
    pub masks: Vec<Option<Vec<f64>>>,
    pub output: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Parameter gradients, shaped exactly like an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

impl Gradients {
    pub fn zeros_like(params: &Mlp) -> Self {
        Self {
            layers: params
                .layers()
                .iter()
                .map(|l| LayerGrad {
                    weights: Matrix::zeros(l.output_dim(), l.input_dim()),
                    bias: vec![0.0; l.output_dim()],
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        assert_eq!(self.layers.len(), other.layers.len(), "gradient depth mismatch");
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.add_assign(&b.weights);
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
    }

    /// Flattened entries, layer by layer (weights then bias).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.flatten().iter().all(|v| *v == 0.0)
    }
}

/// Result of [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct Backprop {
    pub params: Gradients,
    /// `∂L/∂input`, used to chain into an upstream network.
    pub input: Matrix,
}

/// Values a gradient-reversal layer can act on.
pub trait Scale: Sized {
    fn scale(&self, c: f64) -> Self;
}

impl Scale for Matrix {
    fn scale(&self, c: f64) -> Self {
        self.scaled(c)
    }
}

impl Scale for Gradients {
    fn scale(&self, c: f64) -> Self {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: l.weights.scaled(c),
                    bias: l.bias.iter().map(|b| b * c).collect(),
                })
                .collect(),
        }
    }
}

impl Scale for f64 {
    fn scale(&self, c: f64) -> Self {
        self * c
    }
}

/// Gradient reversal: identity forward, multiplies the backward signal by `-mu`.
pub fn grad_reverse<G: Scale>(g: &G, mu: f64) -> G {
    debug_assert!(mu >= 0.0, "reversal weight must be non-negative");
    g.scale(-mu)
}

/// A minibatch drawn from one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub features: Matrix,
    pub labels: Option<Vec<usize>>,
    pub domain: usize,
}

impl Batch {
    pub fn new(features: Matrix, labels: Option<Vec<usize>>, domain: usize) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::Input("batch must contain at least one row".into()));
        }
        if let Some(l) = &labels {
            if l.len() != features.rows() {
                return Err(Error::Shape(format!(
                    "{} labels for {} rows",
                    l.len(),
                    features.rows()
                )));
            }
        }
        Ok(Self {
            features,
            labels,
            domain,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    /// Labels, or an input error for unlabeled batches.
    pub fn require_labels(&self) -> Result<&[usize]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::Input(format!("batch from domain {} is unlabeled", self.domain)))
    }
}
