//! Instance-level binary classifiers.
//!
//! Every learner fits on rows of standardized descriptors with boolean
//! success labels and emits a success probability in `[0, 1]`.

mod baseline;
mod bayes;
mod forest;
mod knn;
mod logistic;
pub mod tree;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use baseline::MajorityBaseline;
pub use bayes::NaiveBayes;
pub use forest::RandomForest;
pub use knn::Knn;
pub use logistic::LogisticRegression;
pub use tree::{DecisionTree, TreeParams};

use crate::{Error, Result};

/// Neighbour counts searched for kNN.
pub const KNN_GRID: [usize; 6] = [1, 3, 5, 7, 9, 11];
/// Ensemble sizes searched for random forests.
pub const FOREST_GRID: [usize; 6] = [50, 100, 200, 300, 400, 500];

/// Anything that maps one feature row to a success probability.
pub trait Scorer {
    fn dim(&self) -> usize;

    /// Success probability for a row of length [`Scorer::dim`].
    fn score(&self, x: &[f64]) -> f64;
}

/// Decision rule shared by every model: success only when strictly above 0.5.
pub fn label_from_score(score: f64) -> bool {
    score > 0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Algorithm {
    MajorityBaseline,
    NaiveBayes {
        #[serde(default = "defaults::laplace")]
        laplace: f64,
    },
    LogisticRegression {
        #[serde(default = "defaults::tolerance")]
        tolerance: f64,
        #[serde(default = "defaults::max_iter")]
        max_iter: usize,
    },
    Knn {
        #[serde(default = "defaults::k")]
        k: usize,
    },
    DecisionTree(#[serde(default)] TreeParams),
    RandomForest {
        #[serde(default = "defaults::estimators")]
        estimators: usize,
        /// Features tried per split; `None` means `ceil(sqrt(dim))`.
        #[serde(default)]
        max_features: Option<usize>,
        #[serde(default = "defaults::bootstrap")]
        bootstrap: bool,
    },
}

mod defaults {
    pub fn laplace() -> f64 {
        1.0
    }
    pub fn tolerance() -> f64 {
        1e-4
    }
    pub fn max_iter() -> usize {
        10_000
    }
    pub fn k() -> usize {
        5
    }
    pub fn estimators() -> usize {
        100
    }
    pub fn bootstrap() -> bool {
        true
    }
}

impl Algorithm {
    pub fn naive_bayes() -> Self {
        Algorithm::NaiveBayes {
            laplace: defaults::laplace(),
        }
    }

    pub fn logistic_regression() -> Self {
        Algorithm::LogisticRegression {
            tolerance: defaults::tolerance(),
            max_iter: defaults::max_iter(),
        }
    }

    pub fn knn(k: usize) -> Self {
        Algorithm::Knn { k }
    }

    pub fn decision_tree() -> Self {
        Algorithm::DecisionTree(TreeParams::default())
    }

    pub fn random_forest(estimators: usize) -> Self {
        Algorithm::RandomForest {
            estimators,
            max_features: None,
            bootstrap: true,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MajorityBaseline => "majority_baseline",
            Algorithm::NaiveBayes { .. } => "naive_bayes",
            Algorithm::LogisticRegression { .. } => "logistic_regression",
            Algorithm::Knn { .. } => "knn",
            Algorithm::DecisionTree(_) => "decision_tree",
            Algorithm::RandomForest { .. } => "random_forest",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(flatten)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        ClassifierSpec { algorithm, seed }
    }

    pub fn baseline() -> Self {
        Self::new(Algorithm::MajorityBaseline, 0)
    }

    /// Every grid point for algorithms that have one, otherwise `self`.
    pub fn grid(&self) -> Vec<ClassifierSpec> {
        match &self.algorithm {
            Algorithm::Knn { .. } => KNN_GRID
                .iter()
                .map(|&k| Self::new(Algorithm::knn(k), self.seed))
                .collect(),
            Algorithm::RandomForest {
                max_features,
                bootstrap,
                ..
            } => FOREST_GRID
                .iter()
                .map(|&estimators| {
                    Self::new(
                        Algorithm::RandomForest {
                            estimators,
                            max_features: *max_features,
                            bootstrap: *bootstrap,
                        },
                        self.seed,
                    )
                })
                .collect(),
            _ => alloc::vec![self.clone()],
        }
    }

    pub fn fit(&self, xs: &[Vec<f64>], ys: &[bool]) -> Result<Classifier> {
        let dim = validate_training(xs, ys)?;
        if !matches!(self.algorithm, Algorithm::MajorityBaseline) && ys.iter().all(|&y| y == ys[0]) {
            return Err(Error::SingleClass);
        }
        let model = match &self.algorithm {
            Algorithm::MajorityBaseline => Classifier::MajorityBaseline(MajorityBaseline::fit(dim, ys)),
            Algorithm::NaiveBayes { laplace } => Classifier::NaiveBayes(NaiveBayes::fit(xs, ys, *laplace)?),
            Algorithm::LogisticRegression { tolerance, max_iter } => {
                Classifier::LogisticRegression(LogisticRegression::fit(xs, ys, *tolerance, *max_iter)?)
            }
            Algorithm::Knn { k } => Classifier::Knn(Knn::fit(xs, ys, *k)?),
            Algorithm::DecisionTree(params) => {
                Classifier::DecisionTree(DecisionTree::fit(xs, ys, params))
            }
            Algorithm::RandomForest {
                estimators,
                max_features,
                bootstrap,
            } => Classifier::RandomForest(RandomForest::fit(
                xs,
                ys,
                *estimators,
                *max_features,
                *bootstrap,
                self.seed,
            )?),
        };
        Ok(model)
    }
}

/// Checks shape and finiteness; returns the row dimension.
pub(crate) fn validate_training(xs: &[Vec<f64>], ys: &[bool]) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    let dim = xs[0].len();
    for row in xs {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(dim)
}

/// A fitted instance-level model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", content = "state", rename_all = "snake_case")]
pub enum Classifier {
    MajorityBaseline(MajorityBaseline),
    NaiveBayes(NaiveBayes),
    LogisticRegression(LogisticRegression),
    Knn(Knn),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
}

impl Classifier {
    fn inner(&self) -> &dyn Scorer {
        match self {
            Classifier::MajorityBaseline(m) => m,
            Classifier::NaiveBayes(m) => m,
            Classifier::LogisticRegression(m) => m,
            Classifier::Knn(m) => m,
            Classifier::DecisionTree(m) => m,
            Classifier::RandomForest(m) => m,
        }
    }

    pub fn predict_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.score(x))
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<bool> {
        self.predict_score(x).map(label_from_score)
    }
}

impl Scorer for Classifier {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn score(&self, x: &[f64]) -> f64 {
        self.inner().score(x).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_class_rejected_except_baseline() {
        let xs = vec![vec![0.0], vec![1.0]];
        let ys = [true, true];
        for algo in [
            Algorithm::naive_bayes(),
            Algorithm::logistic_regression(),
            Algorithm::knn(1),
            Algorithm::decision_tree(),
            Algorithm::random_forest(3),
        ] {
            assert_eq!(ClassifierSpec::new(algo, 0).fit(&xs, &ys).unwrap_err(), Error::SingleClass);
        }
        assert!(ClassifierSpec::baseline().fit(&xs, &ys).is_ok());
    }

    #[test]
    fn empty_training_set() {
        assert_eq!(
            ClassifierSpec::baseline().fit(&[], &[]).unwrap_err(),
            Error::EmptyTrainingSet
        );
    }

    #[test]
    fn dimension_mismatch_on_predict() {
        let m = ClassifierSpec::new(Algorithm::knn(1), 0)
            .fit(&[vec![0.0, 0.0], vec![1.0, 1.0]], &[false, true])
            .unwrap();
        assert_eq!(
            m.predict_score(&[0.0]).unwrap_err(),
            Error::DimensionMismatch { expected: 2, got: 1 }
        );
    }

    #[test]
    fn ties_at_half_are_failures() {
        assert!(!label_from_score(0.5));
        assert!(label_from_score(0.5 + f64::EPSILON));
    }

    #[test]
    fn grids_enumerate_table_values() {
        let knn = ClassifierSpec::new(Algorithm::knn(5), 1).grid();
        assert_eq!(knn.len(), 6);
        let rf = ClassifierSpec::new(Algorithm::random_forest(100), 1).grid();
        assert!(matches!(rf[5].algorithm, Algorithm::RandomForest { estimators: 500, .. }));
        assert_eq!(ClassifierSpec::baseline().grid().len(), 1);
    }
}
