//! Wilcoxon signed-rank test for paired samples.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest sample size (after dropping zero differences) tested exactly.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// `min(W+, W−)`.
    pub statistic: f64,
    /// Two-sided p-value in `(0, 1]`.
    pub p_value: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub exact: bool,
}

/// Average ranks (1-based) of `values`, ties sharing the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 2) as f64 / 2.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

struct Prepared {
    ranks: Vec<f64>,
    w_plus: f64,
    total: f64,
}

fn prepare(a: &[f64], b: &[f64]) -> Result<Option<Prepared>> {
    if a.len() != b.len() {
        return Err(Error::Input(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Input("samples must be finite".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Ok(None);
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = ranks.iter().sum();
    Ok(Some(Prepared { ranks, w_plus, total }))
}

/// Two-sided test of whether `a − b` is symmetric about zero. Zero
/// differences are dropped; if none remain the result is `p = 1`. The null
/// distribution is enumerated exactly for up to [`EXACT_MAX_N`] differences
/// (tied ranks included) and approximated by a tie- and continuity-corrected
/// normal beyond that.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    let Some(prep) = prepare(a, b)? else {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            n: 0,
            exact: true,
        });
    };
    let n = prep.ranks.len();
    let statistic = prep.w_plus.min(prep.total - prep.w_plus);
    let (p_value, exact) = if n <= EXACT_MAX_N {
        (exact_p(&prep.ranks, prep.w_plus), true)
    } else {
        (normal_p(&prep.ranks, prep.w_plus), false)
    };
    Ok(WilcoxonResult {
        statistic,
        p_value,
        n,
        exact,
    })
}

/// Normal-approximation p-value regardless of `n` (for comparing branches).
pub fn wilcoxon_normal_p(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(prepare(a, b)?.map_or(1.0, |p| normal_p(&p.ranks, p.w_plus)))
}

/// Exact p-value regardless of `n`; cost grows with the sum of ranks.
pub fn wilcoxon_exact_p(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(prepare(a, b)?.map_or(1.0, |p| exact_p(&p.ranks, p.w_plus)))
}

/// `2 · min(P(W+ ≤ w), P(W+ ≥ w))` under random signs, capped at 1. Ranks
/// are doubled so average ranks become integers.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    // counts[s] = number of sign assignments whose doubled W+ equals s
    let mut counts = vec![0f64; max + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let w = (2.0 * w_plus).round() as usize;
    let total = 2f64.powi(ranks.len() as i32);
    let lower: f64 = counts[..=w].iter().sum::<f64>() / total;
    let upper: f64 = counts[w..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::standard();
    (2.0 * std.sf(z)).clamp(f64::MIN_POSITIVE, 1.0)
}
