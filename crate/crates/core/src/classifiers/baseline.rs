use serde::{Deserialize, Serialize};

use super::Scorer;

/// Predicts the training majority class for every input.
///
/// The score is the positive-class frequency, so the thresholded label is the
/// majority label (an even split goes to failure).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityBaseline {
    dim: usize,
    positive_rate: f64,
}

impl MajorityBaseline {
    pub(crate) fn fit(dim: usize, ys: &[bool]) -> Self {
        let positives = ys.iter().filter(|&&y| y).count();
        MajorityBaseline {
            dim,
            positive_rate: positives as f64 / ys.len() as f64,
        }
    }

    pub fn majority_label(&self) -> bool {
        super::label_from_score(self.positive_rate)
    }
}

impl Scorer for MajorityBaseline {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, _x: &[f64]) -> f64 {
        self.positive_rate
    }
}

#[cfg(test)]
mod tests {
    use crate::classifiers::ClassifierSpec;
    use alloc::vec::Vec;

    #[test]
    fn constant_prior_score() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| alloc::vec![i as f64]).collect();
        let ys: Vec<bool> = (0..10).map(|i| i < 7).collect();
        let m = ClassifierSpec::baseline().fit(&xs, &ys).unwrap();
        for x in [-5.0, 0.0, 3.3, 100.0] {
            assert_eq!(m.predict_score(&[x]).unwrap(), 0.7);
            assert!(m.predict_label(&[x]).unwrap());
        }
    }
}
