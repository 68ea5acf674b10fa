//! Monte-Carlo check of the discrepancy and risk concentration guarantees on
//! finite-support distributions, where population quantities are exact.

use std::f64::consts::E;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use super::hypothesis::{enumerate_stumps, Hypothesis};
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rng::stream_rng;

/// A distribution on finitely many 1-D points with `Pr(y = 1 | x_j) = label_prob[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDomain {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
    pub label_prob: Vec<f64>,
}

impl DiscreteDomain {
    pub fn new(support: Vec<f64>, probs: Vec<f64>, label_prob: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() || support.len() != label_prob.len() {
            return Err(Error::Input("support, probs and label_prob must align and be non-empty".into()));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Input(format!("probabilities must be >= 0 and sum to 1 (got {total})")));
        }
        if label_prob.iter().any(|q| !(0.0..=1.0).contains(q)) || support.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("label probabilities must lie in [0, 1]".into()));
        }
        Ok(Self {
            support,
            probs,
            label_prob,
        })
    }

    fn positive_mass(&self, h: &Hypothesis) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(x, _)| h.predict(&[**x]))
            .map(|(_, p)| p)
            .sum()
    }

    fn risk(&self, h: &Hypothesis) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .zip(&self.label_prob)
            .map(|((x, p), q)| if h.predict(&[*x]) { p * (1.0 - q) } else { p * q })
            .sum()
    }
}

/// The ε of the discrepancy guarantee for a class of VC dimension `d`:
/// `2·sqrt((2/m)·(ln(4k/δ) + d·ln(e·m/d)))`.
pub fn discrepancy_epsilon(k: usize, m: usize, d: usize, delta: f64) -> f64 {
    let (k, m, d) = (k as f64, m as f64, d as f64);
    2.0 * ((2.0 / m) * ((4.0 * k / delta).ln() + d * (E * m / d).ln())).sqrt()
}

/// The ε of the uniform worst-source risk guarantee:
/// `sqrt((1/2m)·(ln(2k/δ) + d·ln(m·e/d)))`.
pub fn risk_epsilon(k: usize, m: usize, d: usize, delta: f64) -> f64 {
    let (k, m, d) = (k as f64, m as f64, d as f64);
    ((1.0 / (2.0 * m)) * ((2.0 * k / delta).ln() + d * (m * E / d).ln())).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub trials: usize,
    pub disc_epsilon: f64,
    pub risk_epsilon: f64,
    pub disc_violation_rate: f64,
    pub risk_violation_rate: f64,
    pub population_discrepancy: f64,
    /// Largest deviation seen across trials, for each quantity.
    pub max_disc_deviation: f64,
    pub max_risk_deviation: f64,
}

/// Draws `m` labeled points from the target and each source `trials` times
/// and counts how often the empirical discrepancy (over stumps on the joint
/// support) or the uniform worst-source risk deviates from its population
/// value by more than the corresponding ε. Trial `t` uses stream `t` of `seed`.
pub fn concentration_mc(
    target: &DiscreteDomain,
    sources: &[DiscreteDomain],
    m: usize,
    d: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if sources.is_empty() || m == 0 || d == 0 || trials == 0 {
        return Err(Error::Input("need k >= 1, m >= 1, d >= 1 and trials >= 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input(format!("delta {delta} must lie in (0, 1)")));
    }
    let k = sources.len();
    let mut points: Vec<f64> = target.support.clone();
    for s in sources {
        points.extend_from_slice(&s.support);
    }
    let class = enumerate_stumps(&Matrix::column(&points))?;
    let hyps = class.hypotheses();

    let pop_mass_t: Vec<f64> = hyps.iter().map(|h| target.positive_mass(h)).collect();
    let pop_mass_s: Vec<Vec<f64>> = sources
        .iter()
        .map(|s| hyps.iter().map(|h| s.positive_mass(h)).collect())
        .collect();
    let pop_disc = discrepancy_from_masses(&pop_mass_t, &pop_mass_s);
    let pop_worst: Vec<f64> = hyps
        .iter()
        .map(|h| sources.iter().map(|s| s.risk(h)).fold(f64::NEG_INFINITY, f64::max))
        .collect();

    let disc_eps = discrepancy_epsilon(k, m, d, delta);
    let risk_eps = risk_epsilon(k, m, d, delta);

    let deviations: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let mut rng = stream_rng(seed, t as u64);
            let (xt, _) = draw(target, m, &mut rng)?;
            let mut emp_mass_s = Vec::with_capacity(k);
            let mut emp_risk_s = Vec::with_capacity(k);
            for s in sources {
                let (xs, ys) = draw(s, m, &mut rng)?;
                emp_mass_s.push(hyps.iter().map(|h| mass(h, &xs)).collect::<Vec<_>>());
                emp_risk_s.push(hyps.iter().map(|h| sample_risk(h, &xs, &ys)).collect::<Vec<_>>());
            }
            let emp_mass_t: Vec<f64> = hyps.iter().map(|h| mass(h, &xt)).collect();
            let disc_dev = (discrepancy_from_masses(&emp_mass_t, &emp_mass_s) - pop_disc).abs();
            let risk_dev = (0..hyps.len())
                .map(|j| {
                    let emp = emp_risk_s.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
                    (emp - pop_worst[j]).abs()
                })
                .fold(0.0, f64::max);
            Ok((disc_dev, risk_dev))
        })
        .collect::<Result<_>>()?;

    let disc_viol = deviations.iter().filter(|(dd, _)| *dd > disc_eps).count();
    let risk_viol = deviations.iter().filter(|(_, rd)| *rd > risk_eps).count();
    Ok(ConcentrationReport {
        trials,
        disc_epsilon: disc_eps,
        risk_epsilon: risk_eps,
        disc_violation_rate: disc_viol as f64 / trials as f64,
        risk_violation_rate: risk_viol as f64 / trials as f64,
        population_discrepancy: pop_disc,
        max_disc_deviation: deviations.iter().map(|d| d.0).fold(0.0, f64::max),
        max_risk_deviation: deviations.iter().map(|d| d.1).fold(0.0, f64::max),
    })
}

fn discrepancy_from_masses(t: &[f64], sources: &[Vec<f64>]) -> f64 {
    sources
        .iter()
        .map(|s| 2.0 * t.iter().zip(s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn draw<R: Rng>(dom: &DiscreteDomain, m: usize, rng: &mut R) -> Result<(Vec<f64>, Vec<bool>)> {
    let idx = WeightedIndex::new(&dom.probs).map_err(|e| Error::Input(e.to_string()))?;
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    for _ in 0..m {
        let j = idx.sample(rng);
        xs.push(dom.support[j]);
        ys.push(rng.random::<f64>() < dom.label_prob[j]);
    }
    Ok((xs, ys))
}

fn mass(h: &Hypothesis, xs: &[f64]) -> f64 {
    xs.iter().filter(|x| h.predict(&[**x])).count() as f64 / xs.len() as f64
}

fn sample_risk(h: &Hypothesis, xs: &[f64], ys: &[bool]) -> f64 {
    xs.iter().zip(ys).filter(|(x, y)| h.predict(&[**x]) != **y).count() as f64 / xs.len() as f64
}
