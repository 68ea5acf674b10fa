//! Equal-size minibatch sampling across sources and target.
//!
//! Each domain keeps its own shuffled permutation and random stream. A batch
//! takes the next `m` unseen indices; when fewer than `m` remain the domain is
//! reshuffled and the cursor restarts. Domains with fewer than `m` points are
//! sampled with replacement.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::domain::{LabeledDomain, UnlabeledDomain};
use crate::nn::Batch;
use crate::rng::stream_rng;

const TARGET_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
struct Cursor {
    n: usize,
    perm: Vec<usize>,
    pos: usize,
    rng: ChaCha8Rng,
}

impl Cursor {
    fn new(n: usize, mut rng: ChaCha8Rng) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        Self { n, perm, pos: 0, rng }
    }

    fn take(&mut self, m: usize) -> Vec<usize> {
        if self.n < m {
            return (0..m).map(|_| self.rng.random_range(0..self.n)).collect();
        }
        if self.pos + m > self.n {
            self.perm.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let out = self.perm[self.pos..self.pos + m].to_vec();
        self.pos += m;
        out
    }
}

/// Row indices for one training step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchIndices {
    pub sources: Vec<Vec<usize>>,
    pub target: Vec<usize>,
}

impl BatchIndices {
    pub fn materialize(
        &self,
        sources: &[LabeledDomain],
        target: &UnlabeledDomain,
    ) -> (Vec<Batch>, Batch) {
        let s = self
            .sources
            .iter()
            .zip(sources)
            .map(|(idx, d)| d.batch(idx))
            .collect();
        (s, target.batch(&self.target))
    }
}

/// Endless stream of [`BatchIndices`]; every emission has exactly `m` rows per domain.
#[derive(Debug, Clone)]
pub struct MinibatchIter {
    m: usize,
    sources: Vec<Cursor>,
    target: Cursor,
}

impl MinibatchIter {
    /// `source_sizes[i]` and `target_size` must be ≥ 1; `m` is clamped to ≥ 1.
    pub fn new(source_sizes: &[usize], target_size: usize, m: usize, seed: u64) -> Self {
        assert!(
            source_sizes.iter().all(|&n| n > 0) && target_size > 0,
            "domains must be non-empty"
        );
        Self {
            m: m.max(1),
            sources: source_sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| Cursor::new(n, stream_rng(seed, i as u64)))
                .collect(),
            target: Cursor::new(target_size, stream_rng(seed, TARGET_STREAM)),
        }
    }

    pub fn for_domains(
        sources: &[LabeledDomain],
        target: &UnlabeledDomain,
        m: usize,
        seed: u64,
    ) -> Self {
        let sizes: Vec<usize> = sources.iter().map(LabeledDomain::len).collect();
        Self::new(&sizes, target.len(), m, seed)
    }

    pub fn batch_size(&self) -> usize {
        self.m
    }
}

impl Iterator for MinibatchIter {
    type Item = BatchIndices;

    fn next(&mut self) -> Option<BatchIndices> {
        let m = self.m;
        Some(BatchIndices {
            sources: self.sources.iter_mut().map(|c| c.take(m)).collect(),
            target: self.target.take(m),
        })
    }
}

/// Single-domain variant used by source-only baselines.
#[derive(Debug, Clone)]
pub struct SingleDomainIter {
    m: usize,
    cursor: Cursor,
}

impl SingleDomainIter {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        assert!(n > 0, "domain must be non-empty");
        Self {
            m: m.max(1),
            cursor: Cursor::new(n, stream_rng(seed, 0)),
        }
    }
}

impl Iterator for SingleDomainIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        Some(self.cursor.take(self.m))
    }
}
