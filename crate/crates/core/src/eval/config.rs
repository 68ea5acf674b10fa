//! Experiment configuration (TOML).
//!
//! ```toml
//! [data]
//! family = "rotated_moons"        # or "gaussian_shift", or manifest = "path"
//! angles_deg = [0, 15, 30, 40]    # sources first, target last
//! n = 500
//! noise = 0.1
//! seed = 7
//!
//! [model]
//! hidden = [64, 32, 16]           # or width_factor = 0.1
//! disc_hidden = [16]
//!
//! [train]                         # any TrainConfig field; mode is set per method
//! mu = 1.0
//! epochs = 20
//!
//! [experiment]
//! methods = ["source_only_combined", "mdan_hard", "mdan_soft"]
//! seeds = [0, 1, 2, 3, 4]
//! metric = "accuracy"
//!
//! [pad]                           # optional probe settings
//! [bound]                         # optional: enabled, sample, delta
//! ```
//!
//! Relative manifest paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pad::ProbeConfig;
use crate::data::{generate, DomainManifest, MultiDomain, SyntheticSpec};
use crate::error::{Error, Result};
use crate::mdan::{Metric, ModelConfig, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SourceOnlyCombined,
    BestSingleSource,
    DannSingleBest,
    DannCombined,
    MdanHard,
    MdanSoft,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::SourceOnlyCombined,
        Method::BestSingleSource,
        Method::DannSingleBest,
        Method::DannCombined,
        Method::MdanHard,
        Method::MdanSoft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::SourceOnlyCombined => "source_only_combined",
            Method::BestSingleSource => "best_single_source",
            Method::DannSingleBest => "dann_single_best",
            Method::DannCombined => "dann_combined",
            Method::MdanHard => "mdan_hard",
            Method::MdanSoft => "mdan_soft",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub manifest: Option<PathBuf>,
    pub family: Option<String>,
    pub angles_deg: Option<Vec<f64>>,
    pub shifts: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_n() -> usize {
    500
}

fn default_noise() -> f64 {
    0.1
}

impl DataSection {
    pub fn synthetic_spec(&self) -> Result<SyntheticSpec> {
        match self.family.as_deref() {
            Some("rotated_moons") => {
                let angles = self
                    .angles_deg
                    .as_ref()
                    .ok_or_else(|| Error::Config("rotated_moons needs angles_deg".into()))?;
                let rad: Vec<f64> = angles.iter().map(|a| a.to_radians()).collect();
                Ok(SyntheticSpec::rotated_moons(&rad, self.n, self.noise, self.seed))
            }
            Some("gaussian_shift") => {
                let shifts = self
                    .shifts
                    .as_ref()
                    .ok_or_else(|| Error::Config("gaussian_shift needs shifts".into()))?;
                Ok(SyntheticSpec::gaussian_shift(shifts, self.n, self.noise, self.seed))
            }
            Some(other) => Err(Error::Config(format!("unknown family `{other}`"))),
            None => Err(Error::Config("data needs `family` or `manifest`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub hidden: Option<Vec<usize>>,
    pub width_factor: Option<f64>,
    #[serde(default)]
    pub disc_hidden: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_metric")]
    pub metric: Metric,
}

fn default_metric() -> Metric {
    Metric::Accuracy
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundSection {
    pub enabled: bool,
    /// Points per domain drawn for the brute-force bound.
    pub sample: usize,
    pub delta: f64,
    pub seed: u64,
}

impl Default for BoundSection {
    fn default() -> Self {
        Self {
            enabled: true,
            sample: 25,
            delta: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainConfig,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub pad: ProbeConfig,
    #[serde(default)]
    pub bound: BoundSection,
    /// Directory used to resolve relative manifest paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Static checks, including that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        if self.experiment.methods.is_empty() {
            return Err(Error::Config("select at least one method".into()));
        }
        if self.experiment.seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        self.train.validate()?;
        match &self.data.manifest {
            Some(p) => DomainManifest::load(&self.base_dir.join(p))?.check_files()?,
            None => {
                self.data.synthetic_spec()?;
            }
        }
        if self.model.hidden.is_none() && self.model.width_factor.is_none() {
            return Err(Error::Config("model needs `hidden` or `width_factor`".into()));
        }
        Ok(())
    }

    pub fn load_data(&self) -> Result<MultiDomain> {
        match &self.data.manifest {
            Some(p) => DomainManifest::load(&self.base_dir.join(p))?.load_domains(),
            None => generate(&self.data.synthetic_spec()?),
        }
    }

    pub fn model_config(&self, input_dim: usize, num_classes: usize) -> Result<ModelConfig> {
        let mut cfg = match (&self.model.hidden, self.model.width_factor) {
            (Some(h), _) => ModelConfig {
                input_dim,
                hidden: h.clone(),
                num_classes,
                disc_hidden: Vec::new(),
            },
            (None, Some(f)) => ModelConfig::scaled(input_dim, num_classes, f)?,
            (None, None) => return Err(Error::Config("model needs `hidden` or `width_factor`".into())),
        };
        cfg.disc_hidden = self.model.disc_hidden.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}
