//! Wilcoxon signed-rank and rank-sum tests.
//!
//! Ranks are kept doubled so midranks of ties stay integral and the exact null
//! distributions can be counted without rounding.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::{doubled_midranks, normal_sf, tie_groups};
use crate::{Error, Result};

/// Exact enumeration is used up to this many (non-zero) pairs or pooled samples.
pub const EXACT_LIMIT: usize = 12;
pub const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// The first sample tends to be larger.
    Greater,
    Less,
    #[default]
    TwoSided,
}

/// Counts of subset sums: `counts[s]` subsets of `ranks` sum to `s`.
fn subset_sum_counts(ranks: &[u64]) -> Vec<f64> {
    let total: u64 = ranks.iter().sum();
    let mut counts = alloc::vec![0.0; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// `counts[j][s]`: subsets of size `j` with sum `s`.
fn sized_subset_sum_counts(ranks: &[u64], size: usize) -> Vec<Vec<f64>> {
    let total: u64 = ranks.iter().sum();
    let mut counts = alloc::vec![alloc::vec![0.0; total as usize + 1]; size + 1];
    counts[0][0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for j in (1..=size).rev() {
            for s in (0..=reach).rev() {
                let c = counts[j - 1][s];
                if c != 0.0 {
                    counts[j][s + r] += c;
                }
            }
        }
        reach += r;
    }
    counts
}

/// Tail probability of a symmetric-or-not null with doubled centre `centre2`.
fn exact_tail(distribution: &[f64], observed: u64, centre2: u64, alternative: Alternative) -> f64 {
    let total: f64 = distribution.iter().sum();
    let hits: f64 = distribution
        .iter()
        .enumerate()
        .filter(|&(s, _)| {
            let s = s as u64;
            match alternative {
                Alternative::Greater => s >= observed,
                Alternative::Less => s <= observed,
                // |s - c| ≥ |obs - c|, compared at doubled scale.
                Alternative::TwoSided => (2 * s).abs_diff(centre2) >= (2 * observed).abs_diff(centre2),
            }
        })
        .map(|(_, &c)| c)
        .sum();
    hits / total
}

fn normal_tail(statistic: f64, mean: f64, sd: f64, alternative: Alternative) -> f64 {
    if sd <= 0.0 {
        return 1.0;
    }
    let p = match alternative {
        Alternative::Greater => normal_sf((statistic - mean - 0.5) / sd),
        Alternative::Less => normal_sf((mean - statistic - 0.5) / sd),
        Alternative::TwoSided => 2.0 * normal_sf((libm::fabs(statistic - mean) - 0.5) / sd),
    };
    p.min(1.0)
}

fn tie_term(values: &[f64]) -> f64 {
    tie_groups(values)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum()
}

/// Signed-rank test on paired samples, `a - b`.
///
/// Zero differences are dropped. Exact when at most [`EXACT_LIMIT`] pairs
/// remain, otherwise a tie- and continuity-corrected normal approximation.
pub fn signed_rank(a: &[f64], b: &[f64], alternative: Alternative) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::AllZeroDifferences);
    }
    let n = diffs.len();
    if n < MIN_PAIRS {
        return Err(Error::TooFewPairs {
            needed: MIN_PAIRS,
            got: n,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| libm::fabs(*d)).collect();
    let ranks = doubled_midranks(&magnitudes);
    let w_plus2: u64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();

    if n <= EXACT_LIMIT {
        // Sums of doubled ranks, so the centre (half of all doubled ranks) is
        // `n(n+1)/2` and doubling it once more keeps it integral.
        let total2: u64 = ranks.iter().sum();
        return Ok(exact_tail(&subset_sum_counts(&ranks), w_plus2, total2, alternative));
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&magnitudes) / 48.0;
    Ok(normal_tail(w_plus2 as f64 / 2.0, mean, libm::sqrt(var), alternative))
}

/// Rank-sum test of `a` against `b`; `Greater` means `a` tends to be larger.
///
/// Exact when the pooled size is at most [`EXACT_LIMIT`], otherwise a tie- and
/// continuity-corrected normal approximation.
pub fn rank_sum(a: &[f64], b: &[f64], alternative: Alternative) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyClass("first sample"));
    }
    if b.is_empty() {
        return Err(Error::EmptyClass("second sample"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let r2: u64 = ranks[..n1].iter().sum();

    if n <= EXACT_LIMIT {
        let counts = sized_subset_sum_counts(&ranks, n1);
        // Doubled expected rank sum is n1 (n + 1); doubled again for exact_tail.
        let centre2 = 2 * (n1 * (n + 1)) as u64;
        return Ok(exact_tail(&counts[n1], r2, centre2, alternative));
    }
    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let mean = n1f * (nf + 1.0) / 2.0;
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term(&pooled) / (nf * (nf - 1.0)));
    Ok(normal_tail(r2 as f64 / 2.0, mean, libm::sqrt(var.max(0.0)), alternative))
}
