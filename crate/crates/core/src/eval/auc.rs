use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How a tied (negative, positive) score pair counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    /// Ties count 0: only `f(neg) < f(pos)` scores.
    Strict,
    /// Ties count 1/2, so a constant scorer gets 0.5.
    #[default]
    HalfCredit,
}

/// Fraction of (negative, positive) pairs ranked correctly.
///
/// Runs in `O((n0 + n1) log n0)`; pair counts are kept as integers so the
/// result is bit-identical to the quadratic double loop.
pub fn auc(negatives: &[f64], positives: &[f64], mode: TieMode) -> Result<f64> {
    if negatives.is_empty() {
        return Err(Error::EmptyClass("negative"));
    }
    if positives.is_empty() {
        return Err(Error::EmptyClass("positive"));
    }
    if negatives.iter().chain(positives).any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = negatives.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut below, mut tied) = (0u64, 0u64);
    for &p in positives {
        let lt = sorted.partition_point(|&n| n < p);
        let le = sorted.partition_point(|&n| n <= p);
        below += lt as u64;
        tied += (le - lt) as u64;
    }
    Ok(from_counts(below, tied, negatives.len(), positives.len(), mode))
}

pub(crate) fn from_counts(below: u64, tied: u64, n0: usize, n1: usize, mode: TieMode) -> f64 {
    let credit = match mode {
        TieMode::Strict => below as f64,
        TieMode::HalfCredit => below as f64 + 0.5 * tied as f64,
    };
    credit / (n0 as f64 * n1 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn brute(neg: &[f64], pos: &[f64], mode: TieMode) -> f64 {
        let mut credit = 0.0;
        for &n in neg {
            for &p in pos {
                if n < p {
                    credit += 1.0;
                } else if n == p && mode == TieMode::HalfCredit {
                    credit += 0.5;
                }
            }
        }
        credit / (neg.len() as f64 * pos.len() as f64)
    }

    #[test]
    fn worked_examples() {
        for mode in [TieMode::Strict, TieMode::HalfCredit] {
            assert_eq!(auc(&[0.1, 0.2], &[0.8, 0.9], mode).unwrap(), 1.0);
            assert_eq!(auc(&[0.9], &[0.1], mode).unwrap(), 0.0);
            assert_eq!(auc(&[0.4, 0.6], &[0.5, 0.7], mode).unwrap(), 0.75);
        }
    }

    #[test]
    fn constant_scores() {
        assert_eq!(auc(&[0.7; 3], &[0.7; 4], TieMode::Strict).unwrap(), 0.0);
        assert_eq!(auc(&[0.7; 3], &[0.7; 4], TieMode::HalfCredit).unwrap(), 0.5);
    }

    #[test]
    fn empty_class() {
        assert_eq!(auc(&[], &[1.0], TieMode::Strict).unwrap_err(), Error::EmptyClass("negative"));
        assert_eq!(auc(&[1.0], &[], TieMode::Strict).unwrap_err(), Error::EmptyClass("positive"));
    }

    fn scores() -> impl Strategy<Value = Vec<f64>> {
        // Coarse grid so ties are common.
        proptest::collection::vec((0u8..12).prop_map(|v| f64::from(v) / 11.0), 1..30)
    }

    proptest! {
        #[test]
        fn equals_double_loop(neg in scores(), pos in scores()) {
            for mode in [TieMode::Strict, TieMode::HalfCredit] {
                prop_assert_eq!(auc(&neg, &pos, mode).unwrap().to_bits(), brute(&neg, &pos, mode).to_bits());
            }
        }

        #[test]
        fn swapping_classes_complements(neg in scores(), pos in scores()) {
            let a = auc(&neg, &pos, TieMode::HalfCredit).unwrap();
            let b = auc(&pos, &neg, TieMode::HalfCredit).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);

            let ties = neg.iter().flat_map(|n| pos.iter().filter(move |&&p| p == *n)).count() as f64
                / (neg.len() * pos.len()) as f64;
            let a = auc(&neg, &pos, TieMode::Strict).unwrap();
            let b = auc(&pos, &neg, TieMode::Strict).unwrap();
            prop_assert!((1.0 - (a + b) - ties).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_increasing_maps(neg in scores(), pos in scores()) {
            let f = |v: &f64| libm::exp(3.0 * v) - 7.0;
            let neg2: Vec<f64> = neg.iter().map(f).collect();
            let pos2: Vec<f64> = pos.iter().map(f).collect();
            for mode in [TieMode::Strict, TieMode::HalfCredit] {
                prop_assert_eq!(auc(&neg, &pos, mode).unwrap(), auc(&neg2, &pos2, mode).unwrap());
            }
        }
    }
}
