use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, Matrix, Mlp, Role};
use crate::rng::stream_rng;

const INIT_STREAM: u64 = 0x1417;

/// Network widths. The discriminators and task head are single linear layers
/// on top of the extractor's last hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub num_classes: usize,
    /// Hidden widths of each discriminator; empty means a linear discriminator.
    #[serde(default)]
    pub disc_hidden: Vec<usize>,
}

impl ModelConfig {
    /// Hidden widths of the reference text-classification network.
    pub const REFERENCE_HIDDEN: [usize; 3] = [1000, 500, 100];

    /// The reference widths multiplied by `width_factor` (rounded, at least 1).
    pub fn scaled(input_dim: usize, num_classes: usize, width_factor: f64) -> Result<Self> {
        if !(width_factor > 0.0) || !width_factor.is_finite() {
            return Err(Error::Config(format!("width factor {width_factor} must be > 0")));
        }
        let hidden = Self::REFERENCE_HIDDEN
            .iter()
            .map(|&w| ((w as f64 * width_factor).round() as usize).max(1))
            .collect();
        let cfg = Self {
            input_dim,
            hidden,
            num_classes,
            disc_hidden: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0
            || self.hidden.is_empty()
            || self.hidden.contains(&0)
            || self.disc_hidden.contains(&0)
        {
            return Err(Error::Config(format!(
                "invalid widths: input {} hidden {:?}",
                self.input_dim, self.hidden
            )));
        }
        if self.num_classes < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        Ok(())
    }
}

/// Shared extractor, task head and one source-vs-target discriminator per source.
#[derive(Debug, Clone, PartialEq)]
pub struct MdanModel {
    pub(crate) extractor: Mlp,
    pub(crate) task_head: Mlp,
    pub(crate) discriminators: Vec<Mlp>,
}

impl MdanModel {
    /// Glorot-initialized model for `k` sources. Each network draws from its
    /// own stream of `seed`.
    pub fn new(cfg: &ModelConfig, k: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if k == 0 {
            return Err(Error::Config("need at least one source".into()));
        }
        let mut dims = vec![cfg.input_dim];
        dims.extend_from_slice(&cfg.hidden);
        let feat = *cfg.hidden.last().unwrap();
        let extractor = Mlp::glorot(
            Role::Extractor,
            &dims,
            Activation::Relu,
            &mut stream_rng(seed, INIT_STREAM),
        )?;
        let task_head = Mlp::glorot(
            Role::Task,
            &[feat, cfg.num_classes],
            Activation::Identity,
            &mut stream_rng(seed, INIT_STREAM + 1),
        )?;
        let mut disc_dims = vec![feat];
        disc_dims.extend_from_slice(&cfg.disc_hidden);
        disc_dims.push(1);
        let discriminators = (0..k)
            .map(|i| {
                Mlp::glorot(
                    Role::Discriminator,
                    &disc_dims,
                    Activation::Identity,
                    &mut stream_rng(seed, INIT_STREAM + 2 + i as u64),
                )
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            extractor,
            task_head,
            discriminators,
        })
    }

    pub fn from_parts(extractor: Mlp, task_head: Mlp, discriminators: Vec<Mlp>) -> Result<Self> {
        if discriminators.is_empty() {
            return Err(Error::Shape("need at least one discriminator".into()));
        }
        let feat = extractor.output_dim();
        if task_head.input_dim() != feat {
            return Err(Error::Shape(format!(
                "task head expects {} features, extractor emits {feat}",
                task_head.input_dim()
            )));
        }
        if task_head.output_dim() < 2 {
            return Err(Error::Shape("task head needs at least two outputs".into()));
        }
        for (i, d) in discriminators.iter().enumerate() {
            if d.input_dim() != feat || d.output_dim() != 1 {
                return Err(Error::Shape(format!(
                    "discriminator {i} maps {} -> {}, expected {feat} -> 1",
                    d.input_dim(),
                    d.output_dim()
                )));
            }
        }
        Ok(Self {
            extractor,
            task_head,
            discriminators,
        })
    }

    pub fn k(&self) -> usize {
        self.discriminators.len()
    }

    pub fn input_dim(&self) -> usize {
        self.extractor.input_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.task_head.output_dim()
    }

    pub fn extractor(&self) -> &Mlp {
        &self.extractor
    }

    pub fn task_head(&self) -> &Mlp {
        &self.task_head
    }

    pub fn discriminators(&self) -> &[Mlp] {
        &self.discriminators
    }

    pub fn discriminator(&self, i: usize) -> &Mlp {
        &self.discriminators[i]
    }

    /// Every network in checkpoint order: extractor, task head, discriminators.
    pub fn networks(&self) -> Vec<&Mlp> {
        let mut v = vec![&self.extractor, &self.task_head];
        v.extend(self.discriminators.iter());
        v
    }

    /// Inverse of [`MdanModel::networks`].
    pub fn from_networks(mut nets: Vec<Mlp>) -> Result<Self> {
        if nets.len() < 3 {
            return Err(Error::Shape(format!("expected at least 3 networks, found {}", nets.len())));
        }
        let discs = nets.split_off(2);
        let task = nets.pop().unwrap();
        let ext = nets.pop().unwrap();
        Self::from_parts(ext, task, discs)
    }

    /// Task logits, no dropout.
    pub fn logits(&self, x: &Matrix) -> Result<Matrix> {
        let f = self.extractor.predict(x)?;
        self.task_head.predict(&f)
    }

    /// Learned representation, no dropout.
    pub fn features(&self, x: &Matrix) -> Result<Matrix> {
        self.extractor.predict(x)
    }
}
