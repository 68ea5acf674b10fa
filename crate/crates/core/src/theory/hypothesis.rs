//! Finite hypothesis classes: decision stumps plus the two constants, and the
//! symmetric-difference class built from them.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::nn::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Polarity {
    /// Predicts 1 when `x[feature] > threshold`.
    Positive,
    /// Predicts 1 when `x[feature] <= threshold`.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hypothesis {
    Constant(bool),
    Stump {
        feature: usize,
        threshold: f64,
        polarity: Polarity,
    },
}

impl Hypothesis {
    #[inline]
    pub fn predict(&self, x: &[f64]) -> bool {
        match *self {
            Hypothesis::Constant(b) => b,
            Hypothesis::Stump {
                feature,
                threshold,
                polarity,
            } => (x[feature] > threshold) == (polarity == Polarity::Positive),
        }
    }

    pub fn complement(&self) -> Self {
        match *self {
            Hypothesis::Constant(b) => Hypothesis::Constant(!b),
            Hypothesis::Stump {
                feature,
                threshold,
                polarity,
            } => Hypothesis::Stump {
                feature,
                threshold,
                polarity: match polarity {
                    Polarity::Positive => Polarity::Negative,
                    Polarity::Negative => Polarity::Positive,
                },
            },
        }
    }

    pub fn predict_all(&self, sample: &Matrix) -> Vec<bool> {
        sample.iter_rows().map(|x| self.predict(x)).collect()
    }
}

/// Bit-packed predictions of a hypothesis on a sample.
pub(crate) type Behavior = Vec<u64>;

pub(crate) fn behavior(h: &Hypothesis, sample: &Matrix) -> Behavior {
    let mut bits = vec![0u64; sample.rows().div_ceil(64)];
    for (i, x) in sample.iter_rows().enumerate() {
        if h.predict(x) {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    bits
}

fn complement_bits(b: &Behavior, n: usize) -> Behavior {
    let mut out: Behavior = b.iter().map(|w| !w).collect();
    if n % 64 != 0 {
        if let Some(last) = out.last_mut() {
            *last &= (1u64 << (n % 64)) - 1;
        }
    }
    out
}

/// Every stump on `sample` before deduplication: the two constants, then per
/// feature the thresholds `{-∞, midpoints of sorted distinct values, +∞}` with
/// both polarities.
pub fn enumerate_stump_candidates(sample: &Matrix) -> Result<Vec<Hypothesis>> {
    if sample.rows() == 0 {
        return Err(Error::Input("cannot enumerate stumps on an empty sample".into()));
    }
    let mut out = vec![Hypothesis::Constant(false), Hypothesis::Constant(true)];
    for feature in 0..sample.cols() {
        let mut values: Vec<f64> = sample.iter_rows().map(|r| r[feature]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let mut thresholds = Vec::with_capacity(values.len() + 1);
        thresholds.push(f64::NEG_INFINITY);
        thresholds.extend(values.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
        thresholds.push(f64::INFINITY);
        for threshold in thresholds {
            for polarity in [Polarity::Positive, Polarity::Negative] {
                out.push(Hypothesis::Stump {
                    feature,
                    threshold,
                    polarity,
                });
            }
        }
    }
    Ok(out)
}

/// Upper bound on the VC dimension of `dim`-feature stumps with constants.
///
/// On `m` points the class realizes at most `2 + 2·dim·(m − 1)` labelings
/// (each feature contributes `2m` labelings, two of which are the constants),
/// so no set larger than the largest `m` with `2^m <= 2 + 2·dim·(m − 1)` is
/// shattered. For one feature this is exactly 2.
pub fn stump_vc_dimension(dim: usize) -> usize {
    let dim = dim.max(1) as u128;
    let mut m: u128 = 1;
    while m < 127 && (1u128 << (m + 1)) <= 2 + 2 * dim * m {
        m += 1;
    }
    m as usize
}

/// A finite, complement-closed set of hypotheses with distinct behavior on
/// its reference sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHypothesisClass {
    hypotheses: Vec<Hypothesis>,
    vc_dim: usize,
    dim: usize,
}

impl FiniteHypothesisClass {
    /// Deduplicates `candidates` by their labeling of `reference` (first
    /// occurrence wins) and checks complement closure on that sample.
    pub fn new(candidates: Vec<Hypothesis>, reference: &Matrix, vc_dim: usize) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Input("hypothesis class must be non-empty".into()));
        }
        if vc_dim == 0 {
            return Err(Error::Input("declared VC dimension must be >= 1".into()));
        }
        if reference.rows() == 0 {
            return Err(Error::Input("reference sample must be non-empty".into()));
        }
        let mut seen = HashSet::new();
        let mut hypotheses = Vec::new();
        for h in candidates {
            if let Hypothesis::Stump { feature, .. } = h {
                if feature >= reference.cols() {
                    return Err(Error::Input(format!(
                        "stump on feature {feature} for {}-dimensional data",
                        reference.cols()
                    )));
                }
            }
            if seen.insert(behavior(&h, reference)) {
                hypotheses.push(h);
            }
        }
        let n = reference.rows();
        if let Some(b) = seen.iter().find(|b| !seen.contains(&complement_bits(b, n))) {
            let _ = b;
            return Err(Error::Input("hypothesis class is not closed under complement".into()));
        }
        Ok(Self {
            hypotheses,
            vc_dim,
            dim: reference.cols(),
        })
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn get(&self, i: usize) -> &Hypothesis {
        &self.hypotheses[i]
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn vc_dim(&self) -> usize {
        self.vc_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Stumps plus constants on `sample`, deduplicated on `sample`, with the
/// analytic VC bound from [`stump_vc_dimension`].
pub fn enumerate_stumps(sample: &Matrix) -> Result<FiniteHypothesisClass> {
    let candidates = enumerate_stump_candidates(sample)?;
    FiniteHypothesisClass::new(candidates, sample, stump_vc_dimension(sample.cols()))
}

/// `{h ⊕ h' : h, h' ∈ H}`, deduplicated by behavior on a reference sample.
/// Pair `(0, 0)` (the all-zero predicate) always comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct SymDiffClass {
    base: Vec<Hypothesis>,
    pairs: Vec<(usize, usize)>,
    dim: usize,
}

impl SymDiffClass {
    pub fn new(class: &FiniteHypothesisClass, reference: &Matrix) -> Result<Self> {
        if reference.cols() != class.dim() {
            return Err(Error::Input(format!(
                "reference has {} features, class expects {}",
                reference.cols(),
                class.dim()
            )));
        }
        let bits: Vec<Behavior> = class.hypotheses().iter().map(|h| behavior(h, reference)).collect();
        let mut seen = HashSet::new();
        let mut pairs = Vec::new();
        for a in 0..bits.len() {
            for b in a..bits.len() {
                let x: Behavior = bits[a].iter().zip(&bits[b]).map(|(p, q)| p ^ q).collect();
                if seen.insert(x) {
                    pairs.push((a, b));
                }
            }
        }
        Ok(Self {
            base: class.hypotheses().to_vec(),
            pairs,
            dim: class.dim(),
        })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    #[inline]
    pub fn predict(&self, pair: usize, x: &[f64]) -> bool {
        let (a, b) = self.pairs[pair];
        self.base[a].predict(x) ^ self.base[b].predict(x)
    }
}

/// Anything that can report, per member, how many points of a sample it labels 1.
pub trait HypothesisSet {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn input_dim(&self) -> usize;
    fn positive_counts(&self, sample: &Matrix) -> Vec<usize>;
}

impl HypothesisSet for FiniteHypothesisClass {
    fn len(&self) -> usize {
        self.hypotheses.len()
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn positive_counts(&self, sample: &Matrix) -> Vec<usize> {
        self.hypotheses
            .iter()
            .map(|h| sample.iter_rows().filter(|x| h.predict(x)).count())
            .collect()
    }
}

impl HypothesisSet for SymDiffClass {
    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    fn positive_counts(&self, sample: &Matrix) -> Vec<usize> {
        let bits: Vec<Behavior> = self.base.iter().map(|h| behavior(h, sample)).collect();
        self.pairs
            .iter()
            .map(|&(a, b)| {
                bits[a]
                    .iter()
                    .zip(&bits[b])
                    .map(|(p, q)| (p ^ q).count_ones() as usize)
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_feature_two_values() {
        let sample = Matrix::column(&[0.0, 1.0]);
        let cands = enumerate_stump_candidates(&sample).unwrap();
        assert_eq!(cands.len(), 8);
        let thresholds: Vec<f64> = cands
            .iter()
            .filter_map(|h| match h {
                Hypothesis::Stump { threshold, polarity: Polarity::Positive, .. } => Some(*threshold),
                _ => None,
            })
            .collect();
        assert_eq!(thresholds, vec![f64::NEG_INFINITY, 0.5, f64::INFINITY]);
        let class = enumerate_stumps(&sample).unwrap();
        assert_eq!(class.len(), 4);
        assert_eq!(class.vc_dim(), 2);
    }

    #[test]
    fn duplicate_rows_do_not_change_the_class() {
        let a = Matrix::column(&[0.0, 1.0, 3.0]);
        let b = Matrix::column(&[0.0, 1.0, 1.0, 3.0, 0.0]);
        assert_eq!(
            enumerate_stump_candidates(&a).unwrap(),
            enumerate_stump_candidates(&b).unwrap()
        );
    }

    #[test]
    fn complement_closure_required() {
        let sample = Matrix::column(&[0.0, 1.0]);
        let only_one = vec![Hypothesis::Constant(true)];
        assert!(FiniteHypothesisClass::new(only_one, &sample, 1).is_err());
        let both = vec![Hypothesis::Constant(true), Hypothesis::Constant(false)];
        assert_eq!(FiniteHypothesisClass::new(both, &sample, 1).unwrap().len(), 2);
        assert!(enumerate_stumps(&Matrix::zeros(0, 1)).is_err());
    }

    #[test]
    fn vc_bound_values() {
        assert_eq!(stump_vc_dimension(1), 2);
        assert_eq!(stump_vc_dimension(2), 3);
        let mut prev = 0;
        for d in 1..200 {
            let v = stump_vc_dimension(d);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn symdiff_contains_zero_and_is_bounded() {
        let sample = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.5], [2.0, 0.0]]).unwrap();
        let class = enumerate_stumps(&sample).unwrap();
        let sd = SymDiffClass::new(&class, &sample).unwrap();
        assert_eq!(sd.pairs()[0], (0, 0));
        assert!(sd.len() <= class.len() * class.len());
        assert_eq!(sd.positive_counts(&sample)[0], 0);
        for p in 0..sd.len() {
            let direct = sample.iter_rows().filter(|x| sd.predict(p, x)).count();
            assert_eq!(direct, sd.positive_counts(&sample)[p]);
        }
    }
}
