//! Finite-sample complexity terms and the assembled multi-source bound.

use std::f64::consts::E;
use std::fmt::Write as _;

use super::divergence::multi_discrepancy;
use super::hypothesis::{FiniteHypothesisClass, Hypothesis, SymDiffClass};
use super::risk::{empirical_risk_01, optimal_joint_risk, worst_source_risk};
use crate::data::LabeledDomain;
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// `(risk_term, disc_term)` for `k` sources, `m` points per domain, VC
/// dimension `d` and confidence `1 − δ`:
///
/// ```text
/// risk = sqrt( (1 / 2m) · (ln(4k/δ) + d·ln(m·e/d)) )
/// disc = sqrt( (2 / m)  · (ln(8k/δ) + 2d·ln(m·e/2d)) )
/// ```
///
/// The discrepancy term is taken over `HΔH`, whose VC dimension is at most `2d`.
pub fn conc_terms(k: usize, m: usize, d: usize, delta: f64) -> Result<(f64, f64)> {
    if k == 0 || d == 0 {
        return Err(Error::Input("k and d must be >= 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input(format!("delta {delta} must lie in (0, 1)")));
    }
    if m < d {
        return Err(Error::Input(format!("m = {m} is below the VC dimension d = {d}")));
    }
    let (k, m, d) = (k as f64, m as f64, d as f64);
    let risk = ((1.0 / (2.0 * m)) * ((4.0 * k / delta).ln() + d * (m * E / d).ln())).sqrt();
    let disc = ((2.0 / m) * ((8.0 * k / delta).ln() + 2.0 * d * (m * E / (2.0 * d)).ln())).sqrt();
    Ok((risk, disc))
}

/// Every term of the bound together with its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub worst_source_risk: f64,
    pub discrepancy_hdh: f64,
    /// `None` when the target has no labels; the total then omits λ and
    /// [`BoundReport::lambda_available`] is false.
    pub lambda: Option<f64>,
    pub risk_conc_term: f64,
    pub disc_conc_term: f64,
    pub total: f64,
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub delta: f64,
}

impl BoundReport {
    pub fn lambda_available(&self) -> bool {
        self.lambda.is_some()
    }

    /// One `key = value` line per field.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let lambda = self.lambda.map_or_else(|| "unavailable".to_string(), |l| format!("{l:.12e}"));
        writeln!(out, "worst_source_risk = {:.12e}", self.worst_source_risk).unwrap();
        writeln!(out, "discrepancy_hdh = {:.12e}", self.discrepancy_hdh).unwrap();
        writeln!(out, "lambda = {lambda}").unwrap();
        writeln!(out, "lambda_available = {}", self.lambda_available()).unwrap();
        writeln!(out, "risk_conc_term = {:.12e}", self.risk_conc_term).unwrap();
        writeln!(out, "disc_conc_term = {:.12e}", self.disc_conc_term).unwrap();
        writeln!(out, "total = {:.12e}", self.total).unwrap();
        writeln!(out, "k = {}", self.k).unwrap();
        writeln!(out, "m = {}", self.m).unwrap();
        writeln!(out, "d = {}", self.d).unwrap();
        writeln!(out, "delta = {}", self.delta).unwrap();
        out
    }
}

fn pooled(target: &Matrix, sources: &[&Matrix]) -> Result<Matrix> {
    let mut parts = vec![target];
    parts.extend_from_slice(sources);
    Matrix::vstack(&parts)
}

/// Assembles the bound for `h`. The discrepancy is computed over the
/// symmetric-difference class of `class`; `m` is the smallest domain size.
/// λ is filled only when `target_labeled` is given.
pub fn assemble_bound(
    class: &FiniteHypothesisClass,
    h: &Hypothesis,
    target: &Matrix,
    sources: &[LabeledDomain],
    target_labeled: Option<&LabeledDomain>,
    delta: f64,
) -> Result<BoundReport> {
    if sources.is_empty() {
        return Err(Error::Input("need at least one source".into()));
    }
    let source_x: Vec<&Matrix> = sources.iter().map(LabeledDomain::features).collect();
    let sym = SymDiffClass::new(class, &pooled(target, &source_x)?)?;
    let (disc, _) = multi_discrepancy(&sym, target, &source_x)?;
    let worst = worst_source_risk(h, sources);
    let lambda = match target_labeled {
        Some(t) => Some(optimal_joint_risk(class, t, sources)?.1),
        None => None,
    };
    let m = source_x.iter().map(|s| s.rows()).chain([target.rows()]).min().unwrap();
    let d = class.vc_dim();
    let (risk_conc_term, disc_conc_term) = conc_terms(sources.len(), m, d, delta)?;
    let total = worst + disc / 2.0 + lambda.unwrap_or(0.0) + risk_conc_term + disc_conc_term;
    Ok(BoundReport {
        worst_source_risk: worst,
        discrepancy_hdh: disc,
        lambda,
        risk_conc_term,
        disc_conc_term,
        total,
        k: sources.len(),
        m,
        d,
        delta,
    })
}

/// `rhs − lhs` of the population bound with the samples taken as the true
/// distributions: `max_i ε_{S_i}(h) + λ + ½·d_{HΔH} − ε_T(h)`.
pub fn verify_population_bound(
    class: &FiniteHypothesisClass,
    h: &Hypothesis,
    target: &LabeledDomain,
    sources: &[LabeledDomain],
) -> Result<f64> {
    let source_x: Vec<&Matrix> = sources.iter().map(LabeledDomain::features).collect();
    let sym = SymDiffClass::new(class, &pooled(target.features(), &source_x)?)?;
    let (disc, _) = multi_discrepancy(&sym, target.features(), &source_x)?;
    let (_, lambda) = optimal_joint_risk(class, target, sources)?;
    let rhs = worst_source_risk(h, sources) + lambda + 0.5 * disc;
    Ok(rhs - empirical_risk_01(h, target))
}
