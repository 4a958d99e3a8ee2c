use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::auc::{auc, TieMode};
use super::folds::FoldAssignment;
use crate::classifiers::ClassifierSpec;
use crate::data::{Bag, Dataset, FeatureVector};
use crate::mil::{standardize, InstanceBag, MilSpec};
use crate::normalize::{NormalizationMethod, NormalizationStats};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvOptions {
    pub tie_mode: TieMode,
    pub normalization: NormalizationMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub model: String,
    pub spec: MilSpec,
    pub fold_count: usize,
    pub fold_seed: u64,
    pub tie_mode: TieMode,
    /// `None` where the held-out fold has a single class.
    pub fold_aucs: Vec<Option<f64>>,
    pub mean_auc: f64,
    pub baseline_fold_aucs: Vec<Option<f64>>,
    pub baseline_mean_auc: f64,
    /// `(mean_auc - baseline) / baseline`.
    pub relative_improvement: f64,
}

impl EvaluationResult {
    pub fn excluded_folds(&self) -> Vec<usize> {
        (0..self.fold_aucs.len()).filter(|&f| self.fold_aucs[f].is_none()).collect()
    }
}

/// Held-out bag scores for one fold, in dataset order.
pub struct FoldScores {
    pub fold: usize,
    pub bags: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Fits normalization and `spec` on every fold's complement and scores the
/// held-out bags. Only the training bags reach the fitting code.
pub fn held_out_scores(
    spec: &MilSpec,
    dataset: &Dataset,
    folds: &FoldAssignment,
    method: NormalizationMethod,
) -> Result<Vec<FoldScores>> {
    folds.check(dataset)?;
    let assigned: Vec<usize> = folds.folds().collect();
    let mut out = Vec::with_capacity(folds.fold_count);
    for fold in 0..folds.fold_count {
        let train: Vec<Bag> = dataset
            .bags
            .iter()
            .zip(&assigned)
            .filter(|(_, &f)| f != fold)
            .map(|(b, _)| b.clone())
            .collect();
        let test: Vec<usize> = (0..dataset.bags.len()).filter(|&i| assigned[i] == fold).collect();
        let (stats, model) = fit_on(spec, &train, method)?;
        let scores = test
            .iter()
            .map(|&i| {
                let bag = InstanceBag::from_bag(&dataset.bags[i], &stats);
                model.predict(&bag.points).map(|p| p.score)
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(FoldScores {
            fold,
            bags: test,
            scores,
        });
    }
    Ok(out)
}

fn fit_on(
    spec: &MilSpec,
    train: &[Bag],
    method: NormalizationMethod,
) -> Result<(NormalizationStats, crate::mil::MilModel)> {
    let instances: Vec<FeatureVector> = train.iter().flat_map(|b| b.instances.iter().cloned()).collect();
    let stats = NormalizationStats::fit(&instances, method)?;
    let model = spec.fit(&standardize(train, &stats))?;
    Ok((stats, model))
}

fn fold_aucs(dataset: &Dataset, scores: &[FoldScores], mode: TieMode) -> Vec<Option<f64>> {
    scores
        .iter()
        .map(|fs| {
            let (mut neg, mut pos) = (Vec::new(), Vec::new());
            for (&i, &s) in fs.bags.iter().zip(&fs.scores) {
                if dataset.bags[i].label {
                    pos.push(s);
                } else {
                    neg.push(s);
                }
            }
            if neg.is_empty() || pos.is_empty() {
                log::warn!("fold {} holds a single class; excluded from the mean AUC", fs.fold);
                None
            } else {
                auc(&neg, &pos, mode).ok()
            }
        })
        .collect()
}

fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    }
}

/// Bag-level k-fold evaluation of `spec` next to the majority baseline on the
/// same folds.
pub fn cross_validate(
    spec: &MilSpec,
    dataset: &Dataset,
    folds: &FoldAssignment,
    options: CvOptions,
) -> Result<EvaluationResult> {
    let scores = held_out_scores(spec, dataset, folds, options.normalization)?;
    let fold_aucs = fold_aucs(dataset, &scores, options.tie_mode);
    let baseline = MilSpec::mapped(ClassifierSpec::baseline());
    let base_scores = held_out_scores(&baseline, dataset, folds, options.normalization)?;
    let baseline_fold_aucs = self::fold_aucs(dataset, &base_scores, options.tie_mode);

    let mean_auc = mean_defined(&fold_aucs).ok_or(Error::SingleClass)?;
    let baseline_mean_auc = mean_defined(&baseline_fold_aucs).ok_or(Error::SingleClass)?;
    Ok(EvaluationResult {
        model: spec.name(),
        spec: spec.clone(),
        fold_count: folds.fold_count,
        fold_seed: folds.seed,
        tie_mode: options.tie_mode,
        fold_aucs,
        mean_auc,
        baseline_fold_aucs,
        baseline_mean_auc,
        relative_improvement: (mean_auc - baseline_mean_auc) / baseline_mean_auc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::Algorithm;
    use crate::eval::make_folds;
    use crate::features::{build_bags, extract_features};
    use crate::synth::{generate, planted_corpus};

    fn corpus(students: usize, seed: u64) -> Dataset {
        let c = planted_corpus("deadline_rushers", students, seed).unwrap();
        let records = generate(&c).unwrap();
        build_bags(extract_features(&records, &c.configs).unwrap(), "synthetic")
    }

    #[test]
    fn baseline_scores_one_half_per_fold() {
        let d = corpus(60, 1);
        let folds = make_folds(&d, 5, 0).unwrap();
        let r = cross_validate(&MilSpec::mapped(ClassifierSpec::baseline()), &d, &folds, CvOptions::default()).unwrap();
        for a in r.fold_aucs.iter().flatten() {
            assert_eq!(*a, 0.5);
        }
        assert_eq!(r.mean_auc, 0.5);
        assert_eq!(r.relative_improvement, 0.0);

        let strict = CvOptions {
            tie_mode: TieMode::Strict,
            ..CvOptions::default()
        };
        let r = cross_validate(&MilSpec::mapped(ClassifierSpec::baseline()), &d, &folds, strict).unwrap();
        assert_eq!(r.mean_auc, 0.0);
    }

    #[test]
    fn every_bag_is_scored_once() {
        let d = corpus(40, 2);
        let folds = make_folds(&d, 4, 1).unwrap();
        let spec = MilSpec::mapped(ClassifierSpec::new(Algorithm::knn(3), 0));
        let scores = held_out_scores(&spec, &d, &folds, NormalizationMethod::ZScore).unwrap();
        let mut seen: Vec<usize> = scores.iter().flat_map(|f| f.bags.iter().copied()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..d.bags.len()).collect::<Vec<_>>());
    }

    #[test]
    fn held_out_labels_do_not_matter() {
        // Flipping the labels of one fold's bags cannot change that fold's scores.
        let d = corpus(50, 3);
        let folds = make_folds(&d, 5, 2).unwrap();
        let spec = MilSpec::mapped(ClassifierSpec::new(Algorithm::decision_tree(), 0));
        let before = held_out_scores(&spec, &d, &folds, NormalizationMethod::ZScore).unwrap();
        let mut flipped = d.clone();
        for (bag, f) in flipped.bags.iter_mut().zip(folds.folds()) {
            if f == 0 {
                bag.label = !bag.label;
                bag.instances.iter_mut().for_each(|v| v.success = !v.success);
            }
        }
        let after = held_out_scores(&spec, &flipped, &folds, NormalizationMethod::ZScore).unwrap();
        assert_eq!(before[0].scores, after[0].scores);
    }

    #[test]
    fn single_class_fold_is_excluded() {
        let d = corpus(30, 4);
        let mut folds = make_folds(&d, 3, 0).unwrap();
        // Move every positive bag into fold 0 so folds 1 and 2 only hold negatives.
        for (entry, bag) in folds.entries.iter_mut().zip(&d.bags) {
            entry.1 = if bag.label { 0 } else { 1 + entry.1 % 2 };
        }
        let spec = MilSpec::mapped(ClassifierSpec::new(Algorithm::knn(1), 0));
        let r = cross_validate(&spec, &d, &folds, CvOptions::default());
        // Fold 0 trains without positives, so fitting fails outright.
        assert_eq!(r.unwrap_err(), Error::SingleClass);
    }

    #[test]
    fn mismatched_folds() {
        let d = corpus(20, 5);
        let folds = make_folds(&d, 4, 0).unwrap();
        let smaller = d.subset(|i| i > 0);
        let spec = MilSpec::mapped(ClassifierSpec::baseline());
        assert_eq!(
            cross_validate(&spec, &smaller, &folds, CvOptions::default()).unwrap_err(),
            Error::FoldMismatch
        );
    }
}
