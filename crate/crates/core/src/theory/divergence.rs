//! Empirical H-divergence, the multi-source discrepancy and its
//! domain-classification form.

use rand::seq::index;

use super::hypothesis::{FiniteHypothesisClass, HypothesisSet, SymDiffClass};
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::rng::stream_rng;

fn check_pair<H: HypothesisSet + ?Sized>(class: &H, a: &Matrix, b: &Matrix) -> Result<()> {
    if a.rows() == 0 || b.rows() == 0 {
        return Err(Error::Input("divergence needs non-empty samples".into()));
    }
    if a.cols() != b.cols() || a.cols() != class.input_dim() {
        return Err(Error::Input(format!(
            "dimension mismatch: {} vs {} (class expects {})",
            a.cols(),
            b.cols(),
            class.input_dim()
        )));
    }
    Ok(())
}

/// `2 · max_h |Pr_A(h = 1) − Pr_B(h = 1)|` over the empirical measures.
pub fn h_divergence<H: HypothesisSet + ?Sized>(class: &H, a: &Matrix, b: &Matrix) -> Result<f64> {
    check_pair(class, a, b)?;
    let (na, nb) = (a.rows() as f64, b.rows() as f64);
    let ca = class.positive_counts(a);
    let cb = class.positive_counts(b);
    let gap = ca
        .iter()
        .zip(&cb)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .fold(0.0, f64::max);
    Ok(2.0 * gap)
}

/// Largest pairwise divergence between the target and any source, with the
/// index of the first source attaining it.
pub fn multi_discrepancy<H: HypothesisSet + ?Sized>(
    class: &H,
    target: &Matrix,
    sources: &[&Matrix],
) -> Result<(f64, usize)> {
    if sources.is_empty() {
        return Err(Error::Input("need at least one source".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, s) in sources.iter().enumerate() {
        let v = h_divergence(class, target, s)?;
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

/// Result of [`disc_error_identity`], including which rows were kept when
/// domains had to be subsampled to a common size.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityOutcome {
    pub value: f64,
    /// `2 · (1 − 2·err_i)` per source.
    pub per_source: Vec<f64>,
    /// Common sample size after subsampling.
    pub m: usize,
    /// Kept row indices for the target (first) and each source; `None` when
    /// the domain was already of size `m`.
    pub subsamples: Vec<Option<Vec<usize>>>,
}

/// Brings every sample to the smallest size by subsampling without
/// replacement; stream `i` of `seed` handles sample `i` (target first).
pub fn equalize_sizes(samples: &[&Matrix], seed: u64) -> (Vec<Matrix>, Vec<Option<Vec<usize>>>) {
    let m = samples.iter().map(|s| s.rows()).min().unwrap_or(0);
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if s.rows() == m {
                ((*s).clone(), None)
            } else {
                let mut rng = stream_rng(seed, i as u64);
                let mut keep = index::sample(&mut rng, s.rows(), m).into_vec();
                keep.sort_unstable();
                (s.select_rows(&keep), Some(keep))
            }
        })
        .unzip()
}

/// The discrepancy over `HΔH` written as a domain-classification problem.
///
/// For each source, every member `g` of `HΔH` is used as a classifier that
/// answers "target" when `g(x) = 1`; its balanced error is the mean of its
/// miss rate on the target and its false-alarm rate on the source. The value
/// is `max_i 2·(1 − 2·min_g err_i(g))`, which coincides with
/// [`multi_discrepancy`] over the same symmetric-difference class because the
/// class is closed under complement. The factor 2 keeps both on the `[0, 2]`
/// scale of the divergence.
pub fn disc_error_identity(
    class: &FiniteHypothesisClass,
    target: &Matrix,
    sources: &[&Matrix],
    seed: u64,
) -> Result<IdentityOutcome> {
    if sources.is_empty() {
        return Err(Error::Input("need at least one source".into()));
    }
    let mut all: Vec<&Matrix> = vec![target];
    all.extend_from_slice(sources);
    if all.iter().any(|s| s.rows() == 0) {
        return Err(Error::Input("domains must be non-empty".into()));
    }
    if all.iter().any(|s| s.cols() != class.dim()) {
        return Err(Error::Input("domain dimension does not match the class".into()));
    }
    let (equal, subsamples) = equalize_sizes(&all, seed);
    let m = equal[0].rows();
    if equal.iter().any(|s| s.rows() != m) {
        return Err(Error::Input("domains differ in size after subsampling".into()));
    }
    let pooled = Matrix::vstack(&equal.iter().collect::<Vec<_>>())?;
    let sym = SymDiffClass::new(class, &pooled)?;
    let t = &equal[0];
    let mut per_source = Vec::with_capacity(sources.len());
    for s in &equal[1..] {
        let mut min_err = f64::INFINITY;
        for g in 0..sym.len() {
            let missed = t.iter_rows().filter(|x| !sym.predict(g, x)).count();
            let false_alarm = s.iter_rows().filter(|x| sym.predict(g, x)).count();
            let err = 0.5 * (missed as f64 / m as f64 + false_alarm as f64 / m as f64);
            min_err = min_err.min(err);
        }
        per_source.push(2.0 * (1.0 - 2.0 * min_err));
    }
    let value = per_source.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(IdentityOutcome {
        value,
        per_source,
        m,
        subsamples,
    })
}
