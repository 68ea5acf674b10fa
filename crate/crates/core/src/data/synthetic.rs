//! Seeded multi-domain generators.
//!
//! Each source draws from its own random stream derived from the spec seed,
//! and the target from a dedicated one, so source `i` and the target are
//! identical regardless of how many other sources exist.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::domain::{LabeledDomain, MultiDomain, UnlabeledDomain};
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RotatedMoons,
    GaussianShift,
}

/// Per-domain parameter: a rotation (radians) or a mean shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainParam {
    Rotation(f64),
    Shift(Vec<f64>),
}

/// `params` lists the `k` sources first and the target last.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub family: Family,
    pub k: usize,
    pub params: Vec<DomainParam>,
    pub n: usize,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn rotated_moons(angles: &[f64], n: usize, noise: f64, seed: u64) -> Self {
        Self {
            family: Family::RotatedMoons,
            k: angles.len().saturating_sub(1),
            params: angles.iter().map(|&a| DomainParam::Rotation(a)).collect(),
            n,
            noise,
            seed,
        }
    }

    pub fn gaussian_shift(shifts: &[Vec<f64>], n: usize, noise: f64, seed: u64) -> Self {
        Self {
            family: Family::GaussianShift,
            k: shifts.len().saturating_sub(1),
            params: shifts.iter().cloned().map(DomainParam::Shift).collect(),
            n,
            noise,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Input("need at least one source domain".into()));
        }
        if self.params.len() != self.k + 1 {
            return Err(Error::Input(format!(
                "{} domain parameters for k = {} sources plus a target",
                self.params.len(),
                self.k
            )));
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return Err(Error::Input(format!("noise {} must be finite and >= 0", self.noise)));
        }
        Ok(())
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<MultiDomain> {
    match spec.family {
        Family::RotatedMoons => gen_rotated_moons(spec),
        Family::GaussianShift => gen_gaussian_shift(spec),
    }
}

const TARGET_STREAM: u64 = u64::MAX;

fn domain_stream(spec: &SyntheticSpec, d: usize) -> u64 {
    if d == spec.k {
        TARGET_STREAM
    } else {
        d as u64
    }
}

fn split(domains: Vec<LabeledDomain>) -> Result<MultiDomain> {
    let mut domains = domains;
    let target = domains.pop().expect("validated non-empty");
    MultiDomain::new(domains, UnlabeledDomain::with_oracle(target))
}

/// The classic two interleaved half circles (upper moon on the unit circle,
/// lower moon shifted by `(1, 0.5)`), rotated per domain about the origin.
/// Labels alternate, so every domain is balanced.
///
/// The rotation centre is the coordinate origin rather than the cloud's
/// centroid `(0.5, 0.25)`, so a rotation also moves the cloud. (About the
/// centroid a half turn would map the cloud onto itself with the classes
/// swapped.)
pub fn gen_rotated_moons(spec: &SyntheticSpec) -> Result<MultiDomain> {
    spec.validate()?;
    if spec.n < 2 {
        return Err(Error::Input("rotated moons need n >= 2".into()));
    }
    let noise = Normal::new(0.0, spec.noise.max(0.0)).map_err(|e| Error::Input(e.to_string()))?;
    let mut domains = Vec::with_capacity(spec.params.len());
    for (d, param) in spec.params.iter().enumerate() {
        let angle = match param {
            DomainParam::Rotation(a) if a.is_finite() => *a,
            other => {
                return Err(Error::Input(format!(
                    "domain {d}: rotated moons need a finite rotation, got {other:?}"
                )))
            }
        };
        let (sin, cos) = angle.sin_cos();
        let mut rng = stream_rng(spec.seed, domain_stream(spec, d));
        let mut data = Vec::with_capacity(spec.n * 2);
        let mut labels = Vec::with_capacity(spec.n);
        for i in 0..spec.n {
            let label = i % 2;
            let t = rng.random::<f64>() * PI;
            let (x, y) = if label == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            let x = x + noise.sample(&mut rng);
            let y = y + noise.sample(&mut rng);
            data.push(cos * x - sin * y);
            data.push(sin * x + cos * y);
            labels.push(label);
        }
        domains.push(LabeledDomain::new(d, Matrix::from_vec(spec.n, 2, data)?, labels)?);
    }
    split(domains)
}

/// Two isotropic Gaussian classes with means `±e₁`, translated per domain.
pub fn gen_gaussian_shift(spec: &SyntheticSpec) -> Result<MultiDomain> {
    spec.validate()?;
    if spec.noise <= 0.0 {
        return Err(Error::Input(format!("gaussian_shift needs sigma > 0, got {}", spec.noise)));
    }
    if spec.n < 1 {
        return Err(Error::Input("n must be >= 1".into()));
    }
    let dim = match &spec.params[0] {
        DomainParam::Shift(s) if !s.is_empty() => s.len(),
        _ => return Err(Error::Input("gaussian_shift needs non-empty shift vectors".into())),
    };
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::Input(e.to_string()))?;
    let mut domains = Vec::with_capacity(spec.params.len());
    for (d, param) in spec.params.iter().enumerate() {
        let shift = match param {
            DomainParam::Shift(s) if s.len() == dim && s.iter().all(|v| v.is_finite()) => s,
            other => {
                return Err(Error::Input(format!(
                    "domain {d}: expected a finite {dim}-dimensional shift, got {other:?}"
                )))
            }
        };
        let mut rng = stream_rng(spec.seed, domain_stream(spec, d));
        let mut data = Vec::with_capacity(spec.n * dim);
        let mut labels = Vec::with_capacity(spec.n);
        for i in 0..spec.n {
            let label = i % 2;
            let sign = if label == 1 { 1.0 } else { -1.0 };
            for (j, s) in shift.iter().enumerate() {
                let mean = if j == 0 { sign } else { 0.0 };
                data.push(mean + s + noise.sample(&mut rng));
            }
            labels.push(label);
        }
        domains.push(LabeledDomain::new(d, Matrix::from_vec(spec.n, dim, data)?, labels)?);
    }
    split(domains)
}
