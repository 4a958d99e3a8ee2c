use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Scorer;
use crate::{Error, Result};

const ARMIJO: f64 = 0.5;
const MIN_STEP: f64 = 1e-14;

/// Unregularized logistic regression fitted by full-batch gradient descent
/// with a backtracking line search restarted from a unit step each iteration.
///
/// Training stops once an accepted step moves every parameter by less than
/// the tolerance, or after `max_iter` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    weights: Vec<f64>,
    bias: f64,
    iterations: usize,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Mean log-loss of parameters `theta = [w..., b]`.
pub(crate) fn log_loss(theta: &[f64], xs: &[Vec<f64>], ys: &[bool]) -> f64 {
    let (w, b) = theta.split_at(theta.len() - 1);
    let total: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = dot(w, x) + b[0];
            if y {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    total / xs.len() as f64
}

fn gradient(theta: &[f64], xs: &[Vec<f64>], ys: &[bool]) -> Vec<f64> {
    let (w, b) = theta.split_at(theta.len() - 1);
    let mut g = alloc::vec![0.0; theta.len()];
    for (x, &y) in xs.iter().zip(ys) {
        let r = sigmoid(dot(w, x) + b[0]) - f64::from(u8::from(y));
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += r * xj;
        }
        *g.last_mut().unwrap() += r;
    }
    let n = xs.len() as f64;
    g.iter_mut().for_each(|v| *v /= n);
    g
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LogisticRegression {
    pub(crate) fn fit(xs: &[Vec<f64>], ys: &[bool], tolerance: f64, max_iter: usize) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidHyperparameter("tolerance must be > 0".into()));
        }
        let dim = xs[0].len();
        let mut theta = alloc::vec![0.0; dim + 1];
        let mut loss = log_loss(&theta, xs, ys);
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let g = gradient(&theta, xs, ys);
            let g2: f64 = g.iter().map(|v| v * v).sum();
            if g2 == 0.0 {
                break;
            }
            let mut step = 1.0;
            let (candidate, candidate_loss) = loop {
                let c: Vec<f64> = theta.iter().zip(&g).map(|(t, gj)| t - step * gj).collect();
                let l = log_loss(&c, xs, ys);
                if l <= loss - ARMIJO * step * g2 || step < MIN_STEP {
                    break (c, l);
                }
                step *= 0.5;
            };
            let change = theta
                .iter()
                .zip(&candidate)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            theta = candidate;
            loss = candidate_loss;
            if change < tolerance {
                break;
            }
        }
        let bias = theta.pop().unwrap();
        Ok(LogisticRegression {
            weights: theta,
            bias,
            iterations,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

impl Scorer for LogisticRegression {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }
}
