use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Scorer;
use crate::math::squared_distance;
use crate::{Error, Result};

/// k-nearest neighbours under Euclidean distance. The score is the fraction
/// of positive labels among the `k` closest training rows; equal distances
/// are ordered by training index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
}

impl Knn {
    pub(crate) fn fit(xs: &[Vec<f64>], ys: &[bool], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidHyperparameter("k must be ≥ 1".into()));
        }
        Ok(Knn {
            k,
            rows: xs.to_vec(),
            labels: ys.to_vec(),
        })
    }

    /// Training indices of the `k` nearest rows, closest first.
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let mut order: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (squared_distance(r, x), i))
            .collect();
        let k = self.k.min(order.len());
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, by_distance);
            order.truncate(k);
        }
        order.sort_by(by_distance);
        order.into_iter().map(|(_, i)| i).collect()
    }
}

impl Scorer for Knn {
    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn score(&self, x: &[f64]) -> f64 {
        let nn = self.neighbours(x);
        nn.iter().filter(|&&i| self.labels[i]).count() as f64 / nn.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{Algorithm, ClassifierSpec};
    use alloc::vec;

    #[test]
    fn one_nn_picks_closest() {
        let m = ClassifierSpec::new(Algorithm::knn(1), 0)
            .fit(&[vec![0.0], vec![1.0]], &[false, true])
            .unwrap();
        assert_eq!(m.predict_score(&[0.9]).unwrap(), 1.0);
        assert_eq!(m.predict_score(&[0.1]).unwrap(), 0.0);
    }

    #[test]
    fn vote_fraction() {
        let xs = vec![vec![0.0], vec![0.1], vec![0.2], vec![5.0]];
        let ys = [true, true, false, false];
        let m = ClassifierSpec::new(Algorithm::knn(3), 0).fit(&xs, &ys).unwrap();
        assert_eq!(m.predict_score(&[0.05]).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn equal_distances_prefer_lower_index() {
        let xs = vec![vec![-1.0], vec![1.0]];
        let knn = Knn::fit(&xs, &[true, false], 1).unwrap();
        assert_eq!(knn.neighbours(&[0.0]), [0]);
    }

    #[test]
    fn k_larger_than_training_set() {
        let knn = Knn::fit(&[vec![0.0], vec![1.0]], &[true, false], 11).unwrap();
        assert_eq!(knn.score(&[0.0]), 0.5);
    }
}
