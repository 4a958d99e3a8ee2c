use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Scorer;
use crate::{Error, Result};

/// Relative variance floor, as a fraction of the largest feature variance.
const VAR_SMOOTHING: f64 = 1e-9;

/// Naive Bayes with Gaussian likelihoods for real-valued columns and
/// Laplace-smoothed Bernoulli likelihoods for 0/1 indicator columns.
///
/// A column is treated as an indicator when every training value is exactly
/// 0 or 1. At prediction time an indicator value counts as "on" when ≥ 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    binary: Vec<bool>,
    /// Indexed `[class][feature]`, class 0 = failure.
    means: [Vec<f64>; 2],
    variances: [Vec<f64>; 2],
    /// P(x = 1 | class) for indicator columns; unused entries are 0.
    on_probability: [Vec<f64>; 2],
    log_prior: [f64; 2],
}

impl NaiveBayes {
    pub(crate) fn fit(xs: &[Vec<f64>], ys: &[bool], laplace: f64) -> Result<Self> {
        if !(laplace >= 0.0) {
            return Err(Error::InvalidHyperparameter("laplace smoothing must be ≥ 0".into()));
        }
        let dim = xs[0].len();
        let n = xs.len() as f64;
        let binary: Vec<bool> = (0..dim)
            .map(|j| xs.iter().all(|r| r[j] == 0.0 || r[j] == 1.0))
            .collect();

        let epsilon = VAR_SMOOTHING
            * (0..dim)
                .filter(|&j| !binary[j])
                .map(|j| {
                    let m = xs.iter().map(|r| r[j]).sum::<f64>() / n;
                    xs.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n
                })
                .fold(0.0, f64::max);

        let mut means = [alloc::vec![0.0; dim], alloc::vec![0.0; dim]];
        let mut variances = [alloc::vec![0.0; dim], alloc::vec![0.0; dim]];
        let mut on_probability = [alloc::vec![0.0; dim], alloc::vec![0.0; dim]];
        let mut log_prior = [0.0; 2];
        for class in 0..2 {
            let rows: Vec<&Vec<f64>> = xs
                .iter()
                .zip(ys)
                .filter(|(_, &y)| usize::from(y) == class)
                .map(|(r, _)| r)
                .collect();
            let nc = rows.len() as f64;
            log_prior[class] = libm::log(nc / n);
            for j in 0..dim {
                if binary[j] {
                    let on = rows.iter().filter(|r| r[j] == 1.0).count() as f64;
                    on_probability[class][j] = (on + laplace) / (nc + 2.0 * laplace);
                } else {
                    let m = rows.iter().map(|r| r[j]).sum::<f64>() / nc;
                    let v = rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / nc;
                    means[class][j] = m;
                    variances[class][j] = v + epsilon;
                }
            }
        }
        if (0..dim).any(|j| !binary[j] && (variances[0][j] <= 0.0 || variances[1][j] <= 0.0)) {
            return Err(Error::DegenerateFeature("naive_bayes input"));
        }
        Ok(NaiveBayes {
            binary,
            means,
            variances,
            on_probability,
            log_prior,
        })
    }

    fn log_joint(&self, class: usize, x: &[f64]) -> f64 {
        let mut lp = self.log_prior[class];
        for (j, &v) in x.iter().enumerate() {
            if self.binary[j] {
                let p = self.on_probability[class][j];
                lp += libm::log(if v >= 0.5 { p } else { 1.0 - p });
            } else {
                let var = self.variances[class][j];
                let d = v - self.means[class][j];
                lp += -0.5 * libm::log(2.0 * core::f64::consts::PI * var) - d * d / (2.0 * var);
            }
        }
        lp
    }
}

impl Scorer for NaiveBayes {
    fn dim(&self) -> usize {
        self.binary.len()
    }

    fn score(&self, x: &[f64]) -> f64 {
        let neg = self.log_joint(0, x);
        let pos = self.log_joint(1, x);
        1.0 / (1.0 + libm::exp(neg - pos))
    }
}
