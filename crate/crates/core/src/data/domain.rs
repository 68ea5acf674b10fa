use crate::error::{Error, Result};
use crate::nn::{Batch, Matrix};

fn check_features(features: &Matrix) -> Result<()> {
    if features.rows() == 0 {
        return Err(Error::Input("a domain needs at least one point".into()));
    }
    if let Some(pos) = features.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::Input(format!(
            "non-finite feature at row {}",
            pos / features.cols().max(1)
        )));
    }
    Ok(())
}

/// A finite labeled sample from one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDomain {
    pub id: usize,
    features: Matrix,
    labels: Vec<usize>,
}

impl LabeledDomain {
    pub fn new(id: usize, features: Matrix, labels: Vec<usize>) -> Result<Self> {
        check_features(&features)?;
        if labels.len() != features.rows() {
            return Err(Error::Shape(format!(
                "{} labels for {} points",
                labels.len(),
                features.rows()
            )));
        }
        Ok(Self {
            id,
            features,
            labels,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            id: self.id,
            features: self.features.select_rows(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    pub fn batch(&self, rows: &[usize]) -> Batch {
        Batch {
            features: self.features.select_rows(rows),
            labels: Some(rows.iter().map(|&r| self.labels[r]).collect()),
            domain: self.id,
        }
    }

    /// Pools several domains into one, keeping the first domain's id.
    pub fn concat(parts: &[LabeledDomain]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Input("nothing to concatenate".into()))?;
        let feats: Vec<&Matrix> = parts.iter().map(|d| &d.features).collect();
        let features = Matrix::vstack(&feats)?;
        let labels = parts.iter().flat_map(|d| d.labels.iter().copied()).collect();
        Self::new(first.id, features, labels)
    }
}

/// A target-domain sample as seen by training code: features only.
///
/// Labels may be carried along for oracle evaluation (accuracy on the target,
/// λ) but are reachable only through [`UnlabeledDomain::oracle_labels`] and
/// [`UnlabeledDomain::oracle`]; nothing in the training path calls them.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledDomain {
    pub id: usize,
    features: Matrix,
    oracle: Option<Vec<usize>>,
}

impl UnlabeledDomain {
    pub fn new(id: usize, features: Matrix) -> Result<Self> {
        check_features(&features)?;
        Ok(Self {
            id,
            features,
            oracle: None,
        })
    }

    /// Hides the labels of `domain` behind the oracle accessor.
    pub fn with_oracle(domain: LabeledDomain) -> Self {
        Self {
            id: domain.id,
            features: domain.features,
            oracle: Some(domain.labels),
        }
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn has_oracle(&self) -> bool {
        self.oracle.is_some()
    }

    pub fn oracle_labels(&self) -> Option<&[usize]> {
        self.oracle.as_deref()
    }

    /// Labeled view for evaluation; fails when no labels were retained.
    pub fn oracle(&self) -> Result<LabeledDomain> {
        match &self.oracle {
            Some(labels) => LabeledDomain::new(self.id, self.features.clone(), labels.clone()),
            None => Err(Error::LabelsUnavailable(format!(
                "domain {} was loaded without labels",
                self.id
            ))),
        }
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            id: self.id,
            features: self.features.select_rows(rows),
            oracle: self
                .oracle
                .as_ref()
                .map(|l| rows.iter().map(|&r| l[r]).collect()),
        }
    }

    /// Unlabeled batch; oracle labels are never copied into it.
    pub fn batch(&self, rows: &[usize]) -> Batch {
        Batch {
            features: self.features.select_rows(rows),
            labels: None,
            domain: self.id,
        }
    }
}

/// `k` labeled sources plus one target.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiDomain {
    pub sources: Vec<LabeledDomain>,
    pub target: UnlabeledDomain,
}

impl MultiDomain {
    pub fn new(sources: Vec<LabeledDomain>, target: UnlabeledDomain) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::Input("at least one source domain is required".into()));
        }
        let dim = target.dim();
        if let Some(s) = sources.iter().find(|s| s.dim() != dim) {
            return Err(Error::Shape(format!(
                "source {} has dimension {}, target has {dim}",
                s.id,
                s.dim()
            )));
        }
        Ok(Self { sources, target })
    }

    pub fn k(&self) -> usize {
        self.sources.len()
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }
}
