//! Exact 0-1 risks and the optimal joint risk λ.

use super::hypothesis::{FiniteHypothesisClass, Hypothesis};
use crate::data::{LabeledDomain, UnlabeledDomain};
use crate::error::{Error, Result};

/// Fraction of points where `h` disagrees with the label; labels are read as
/// binary (`1` is the positive class, anything else negative).
pub fn empirical_risk_01(h: &Hypothesis, dom: &LabeledDomain) -> f64 {
    let wrong = dom
        .features()
        .iter_rows()
        .zip(dom.labels())
        .filter(|(x, &y)| h.predict(x) != (y == 1))
        .count();
    wrong as f64 / dom.len() as f64
}

pub fn worst_source_risk(h: &Hypothesis, sources: &[LabeledDomain]) -> f64 {
    sources
        .iter()
        .map(|s| empirical_risk_01(h, s))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_binary(d: &LabeledDomain) -> Result<()> {
    if d.labels().iter().any(|&y| y > 1) {
        return Err(Error::Input(format!("domain {} has non-binary labels", d.id)));
    }
    Ok(())
}

/// The minimizer of `ε_T(h) + max_i ε_{S_i}(h)` with its value λ; the first
/// minimizer in class order wins ties.
pub fn optimal_joint_risk(
    class: &FiniteHypothesisClass,
    target: &LabeledDomain,
    sources: &[LabeledDomain],
) -> Result<(Hypothesis, f64)> {
    if sources.is_empty() {
        return Err(Error::Input("need at least one source".into()));
    }
    check_binary(target)?;
    for s in sources {
        check_binary(s)?;
    }
    let mut best: Option<(Hypothesis, f64)> = None;
    for h in class.hypotheses() {
        let v = empirical_risk_01(h, target) + worst_source_risk(h, sources);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((*h, v));
        }
    }
    Ok(best.expect("class is non-empty"))
}

/// [`optimal_joint_risk`] on a target that may lack labels.
pub fn optimal_joint_risk_oracle(
    class: &FiniteHypothesisClass,
    target: &UnlabeledDomain,
    sources: &[LabeledDomain],
) -> Result<(Hypothesis, f64)> {
    optimal_joint_risk(class, &target.oracle()?, sources)
}
