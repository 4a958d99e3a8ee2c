use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, FeatureSampler, TreeParams};
use super::Scorer;
use crate::{Error, Result};

/// Bagged Gini trees with per-split feature subsampling. The score is the
/// mean of the trees' leaf positive fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub(crate) fn fit(
        xs: &[Vec<f64>],
        ys: &[bool],
        estimators: usize,
        max_features: Option<usize>,
        bootstrap: bool,
        seed: u64,
    ) -> Result<Self> {
        if estimators == 0 {
            return Err(Error::InvalidHyperparameter("estimators must be ≥ 1".into()));
        }
        let dim = xs[0].len();
        let max_features = max_features.unwrap_or_else(|| default_max_features(dim));
        if max_features == 0 || max_features > dim {
            return Err(Error::InvalidHyperparameter(alloc::format!(
                "max_features must be in 1..={dim}"
            )));
        }
        let n = xs.len();
        let params = TreeParams::default();
        // One independent stream per tree, derived from the root seed.
        let mut root = ChaCha8Rng::seed_from_u64(seed);
        let tree_seeds: Vec<u64> = (0..estimators).map(|_| root.random()).collect();
        let trees = tree_seeds
            .into_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let rows: Vec<usize> = if bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let sampler = FeatureSampler {
                    rng: &mut rng,
                    max_features,
                };
                DecisionTree::fit_rows(xs, ys, rows, &params, Some(sampler))
            })
            .collect();
        Ok(RandomForest { trees })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}

/// `ceil(sqrt(dim))`.
pub(crate) fn default_max_features(dim: usize) -> usize {
    let mut m = 1;
    while m * m < dim {
        m += 1;
    }
    m
}

impl Scorer for RandomForest {
    fn dim(&self) -> usize {
        self.trees[0].dim()
    }

    fn score(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.score(x)).sum::<f64>() / self.trees.len() as f64
    }
}
