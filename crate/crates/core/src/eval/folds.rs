use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{BagKey, Dataset};
use crate::{Error, Result};

pub const DEFAULT_FOLDS: usize = 10;

/// Bag-to-fold map in dataset order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub fold_count: usize,
    pub seed: u64,
    pub entries: Vec<(BagKey, usize)>,
}

impl FoldAssignment {
    /// Fold of each bag, by dataset position.
    pub fn folds(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(_, f)| *f)
    }

    pub fn fold_of(&self, key: &BagKey) -> Option<usize> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, f)| *f)
    }

    /// Checks the assignment was made for exactly these bags in this order.
    pub fn check(&self, dataset: &Dataset) -> Result<()> {
        let same = self.entries.len() == dataset.bags.len()
            && self.entries.iter().zip(&dataset.bags).all(|((k, f), b)| *k == b.key && *f < self.fold_count);
        if same {
            Ok(())
        } else {
            Err(Error::FoldMismatch)
        }
    }
}

/// Stratified bag-level folds.
///
/// Positive bags are dealt first, each to the fold with the fewest positives
/// (then fewest bags), and negatives then fill the smallest folds. Remaining
/// ties follow a seeded fold order, and bags are visited in seeded order.
pub fn make_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    let n = dataset.bags.len();
    if k < 2 {
        return Err(Error::InvalidHyperparameter("fold count must be ≥ 2".into()));
    }
    if n < k {
        return Err(Error::TooFewBags { bags: n, folds: k });
    }
    let positives = dataset.positive_bags();
    let minority = positives.min(n - positives);
    if minority < k {
        log::warn!("only {minority} bags of the minority class for {k} folds; some folds will lack it");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rank: Vec<usize> = (0..k).collect();
    rank.shuffle(&mut rng);
    let mut pos_idx: Vec<usize> = (0..n).filter(|&i| dataset.bags[i].label).collect();
    let mut neg_idx: Vec<usize> = (0..n).filter(|&i| !dataset.bags[i].label).collect();
    pos_idx.shuffle(&mut rng);
    neg_idx.shuffle(&mut rng);

    let mut fold = alloc::vec![usize::MAX; n];
    let mut pos_count = alloc::vec![0usize; k];
    let mut neg_count = alloc::vec![0usize; k];
    for &i in &pos_idx {
        let f = (0..k)
            .min_by_key(|&f| (pos_count[f], pos_count[f] + neg_count[f], rank[f]))
            .expect("k ≥ 2");
        fold[i] = f;
        pos_count[f] += 1;
    }
    for &i in &neg_idx {
        let f = (0..k)
            .min_by_key(|&f| (pos_count[f] + neg_count[f], neg_count[f], rank[f]))
            .expect("k ≥ 2");
        fold[i] = f;
        neg_count[f] += 1;
    }
    Ok(FoldAssignment {
        fold_count: k,
        seed,
        entries: dataset.bags.iter().map(|b| b.key.clone()).zip(fold).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AssignmentId, Bag, FeatureVector, Verdict};
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn dataset(labels: &[bool]) -> Dataset {
        let bags = labels
            .iter()
            .enumerate()
            .map(|(i, &label)| Bag {
                key: BagKey {
                    student_id: format!("s{i:03}"),
                    assignment: AssignmentId::A1,
                },
                instances: vec![FeatureVector {
                    days_to_deadline: 1.0,
                    first_submission_days_to_deadline: 1.0,
                    submissions_to_date: 1,
                    submission_days_to_date: 1,
                    assignment: AssignmentId::A1,
                    success: label,
                    verdict: Verdict::TestError,
                }],
                label,
            })
            .collect();
        Dataset {
            bags,
            normalization: None,
            provenance: "test".into(),
        }
    }

    fn counts(d: &Dataset, f: &FoldAssignment) -> (Vec<usize>, Vec<usize>) {
        let mut size = vec![0; f.fold_count];
        let mut pos = vec![0; f.fold_count];
        for (b, fold) in d.bags.iter().zip(f.folds()) {
            size[fold] += 1;
            pos[fold] += usize::from(b.label);
        }
        (size, pos)
    }

    #[test]
    fn ten_and_ten_give_one_of_each() {
        let labels: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let d = dataset(&labels);
        let f = make_folds(&d, 10, 3).unwrap();
        let (size, pos) = counts(&d, &f);
        assert!(size.iter().all(|&s| s == 2));
        assert!(pos.iter().all(|&p| p == 1));
    }

    #[test]
    fn twenty_one_bags() {
        let labels: Vec<bool> = (0..21).map(|i| i % 3 == 0).collect();
        let d = dataset(&labels);
        let (size, _) = counts(&d, &make_folds(&d, 10, 0).unwrap());
        assert!(size.iter().all(|&s| s == 2 || s == 3));
        assert_eq!(size.iter().filter(|&&s| s == 3).count(), 1);
    }

    #[test]
    fn too_few_bags() {
        let d = dataset(&[true, false, true]);
        assert_eq!(make_folds(&d, 10, 0).unwrap_err(), Error::TooFewBags { bags: 3, folds: 10 });
    }

    #[test]
    fn seeded() {
        let labels: Vec<bool> = (0..37).map(|i| i % 4 == 0).collect();
        let d = dataset(&labels);
        assert_eq!(make_folds(&d, 5, 9).unwrap(), make_folds(&d, 5, 9).unwrap());
        assert_ne!(make_folds(&d, 5, 9).unwrap(), make_folds(&d, 5, 10).unwrap());
    }

    proptest! {
        #[test]
        fn balanced(labels in proptest::collection::vec(any::<bool>(), 10..120), k in 2usize..11, seed in any::<u64>()) {
            let d = dataset(&labels);
            let f = make_folds(&d, k, seed).unwrap();
            f.check(&d).unwrap();
            let (size, pos) = counts(&d, &f);
            prop_assert_eq!(size.iter().sum::<usize>(), labels.len());
            prop_assert!(size.iter().max().unwrap() - size.iter().min().unwrap() <= 1);
            let ratio = d.positive_bags() as f64 / labels.len() as f64;
            for (s, p) in size.iter().zip(&pos) {
                prop_assert!((*p as f64 - *s as f64 * ratio).abs() <= 1.0, "{:?} {:?}", size, pos);
            }
        }
    }
}
