use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BagPrediction, InstanceBag};
use crate::math::squared_distance;
use crate::{Error, Result};

const INITIAL_STEP: f64 = 0.1;
const INNER_ITERATIONS: usize = 100;
const MIN_STEP: f64 = 1e-12;
/// Caps `a / (1 - a)` when a negative instance sits on the target.
const MAX_REPULSION: f64 = 1e12;

/// EM variant of diverse density.
///
/// Instance affinity to a target `h` is `exp(-scale² ‖x - h‖²)` and a bag's
/// positive probability is its largest instance affinity. Diverse density is
/// the product of that probability over positive bags times one minus it over
/// negative bags. Each EM round fixes the most affine instance of every bag,
/// then climbs the resulting smooth log-objective by gradient ascent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmDd {
    target: Vec<f64>,
    scale: f64,
    threshold: f64,
    log_dd: f64,
}

pub fn affinity(x: &[f64], h: &[f64], scale: f64) -> f64 {
    libm::exp(-scale * scale * squared_distance(x, h))
}

fn nearest(points: &[Vec<f64>], h: &[f64]) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, squared_distance(p, h)))
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

/// `ln(1 - exp(-t))` for `t ≥ 0`.
fn ln_one_minus_exp_neg(t: f64) -> f64 {
    libm::log(-libm::expm1(-t))
}

/// Natural log of the diverse density of `h`.
pub fn log_diverse_density(bags: &[InstanceBag], h: &[f64], scale: f64) -> f64 {
    let s2 = scale * scale;
    bags.iter()
        .map(|b| {
            let (_, d2) = nearest(&b.points, h);
            if b.label {
                -s2 * d2
            } else {
                ln_one_minus_exp_neg(s2 * d2)
            }
        })
        .sum()
}

/// Mean log-objective with one fixed instance per bag.
fn surrogate(selected: &[(&[f64], bool)], h: &[f64], s2: f64) -> f64 {
    let total: f64 = selected
        .iter()
        .map(|&(x, positive)| {
            let d2 = squared_distance(x, h);
            if positive {
                -s2 * d2
            } else {
                ln_one_minus_exp_neg(s2 * d2)
            }
        })
        .sum();
    total / selected.len() as f64
}

fn surrogate_gradient(selected: &[(&[f64], bool)], h: &[f64], s2: f64) -> Vec<f64> {
    let mut g = alloc::vec![0.0; h.len()];
    for &(x, positive) in selected {
        let weight = if positive {
            2.0 * s2
        } else {
            let d2 = squared_distance(x, h);
            -2.0 * s2 * (1.0 / libm::expm1(s2 * d2)).min(MAX_REPULSION)
        };
        for (gj, (xj, hj)) in g.iter_mut().zip(x.iter().zip(h)) {
            *gj += weight * (xj - hj);
        }
    }
    let n = selected.len() as f64;
    g.iter_mut().for_each(|v| *v /= n);
    g
}

fn ascend(selected: &[(&[f64], bool)], start: Vec<f64>, s2: f64) -> Vec<f64> {
    let mut h = start;
    let mut value = surrogate(selected, &h, s2);
    let mut step = INITIAL_STEP;
    for _ in 0..INNER_ITERATIONS {
        let g = surrogate_gradient(selected, &h, s2);
        let candidate: Vec<f64> = h.iter().zip(&g).map(|(hj, gj)| hj + step * gj).collect();
        let v = surrogate(selected, &candidate, s2);
        if v > value {
            h = candidate;
            value = v;
        } else {
            step *= 0.5;
            if step < MIN_STEP {
                break;
            }
        }
    }
    h
}

impl EmDd {
    pub(crate) fn fit(
        bags: &[InstanceBag],
        scale: f64,
        epochs: usize,
        threshold: f64,
        max_restarts: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidHyperparameter("scale must be > 0".into()));
        }
        if bags.iter().all(|b| b.label) || bags.iter().all(|b| !b.label) {
            return Err(Error::SingleClass);
        }
        let mut starts: Vec<&Vec<f64>> = bags.iter().filter(|b| b.label).flat_map(|b| &b.points).collect();
        if let Some(cap) = max_restarts {
            if cap == 0 {
                return Err(Error::InvalidHyperparameter("max_restarts must be ≥ 1".into()));
            }
            if cap < starts.len() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut keep = sample(&mut rng, starts.len(), cap).into_vec();
                keep.sort_unstable();
                starts = keep.into_iter().map(|i| starts[i]).collect();
            }
        }

        let s2 = scale * scale;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for start in starts {
            let (h, ldd) = Self::restart(bags, start.clone(), epochs, scale, s2);
            // Strict comparison keeps the earliest restart on ties.
            if best.as_ref().is_none_or(|b| ldd > b.1) {
                best = Some((h, ldd));
            }
        }
        let (target, log_dd) = best.expect("at least one positive instance");
        Ok(EmDd {
            target,
            scale,
            threshold,
            log_dd,
        })
    }

    /// Best point reached from `start` and its log diverse density.
    fn restart(bags: &[InstanceBag], start: Vec<f64>, epochs: usize, scale: f64, s2: f64) -> (Vec<f64>, f64) {
        let mut best_ldd = log_diverse_density(bags, &start, scale);
        let mut best_h = start.clone();
        let mut h = start;
        for _ in 0..epochs {
            let selected: Vec<(&[f64], bool)> = bags
                .iter()
                .map(|b| (b.points[nearest(&b.points, &h).0].as_slice(), b.label))
                .collect();
            h = ascend(&selected, h, s2);
            let ldd = log_diverse_density(bags, &h, scale);
            if ldd > best_ldd {
                best_ldd = ldd;
                best_h = h.clone();
            } else {
                break;
            }
        }
        (best_h, best_ldd)
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn log_dd(&self) -> f64 {
        self.log_dd
    }

    pub(crate) fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn max_affinity(&self, bag: &[Vec<f64>]) -> f64 {
        let (_, d2) = nearest(bag, &self.target);
        libm::exp(-self.scale * self.scale * d2)
    }

    pub(crate) fn predict(&self, bag: &[Vec<f64>]) -> BagPrediction {
        let a = self.max_affinity(bag);
        BagPrediction {
            label: a >= self.threshold,
            confidence: a,
            score: a,
        }
    }
}
