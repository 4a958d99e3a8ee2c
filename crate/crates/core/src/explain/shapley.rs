use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{Classifier, DecisionTree, Scorer};
use crate::data::{feature_index, FEATURE_NAMES};
use crate::{Error, Result};

pub const DEFAULT_BACKGROUND: usize = 100;

/// Shapley decomposition of one score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    /// One value per feature, in feature order.
    pub phi: Vec<f64>,
    /// Mean score over the background.
    pub base_value: f64,
    /// Score of the explained instance.
    pub score: f64,
}

impl Attribution {
    /// Feature indices by decreasing `|phi|`, ties in feature order.
    pub fn ranked(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.phi.len()).collect();
        order.sort_by(|&a, &b| libm::fabs(self.phi[b]).total_cmp(&libm::fabs(self.phi[a])).then(a.cmp(&b)));
        order
    }
}

/// Up to `size` rows chosen with `seed`, kept in their original order.
pub fn sample_background(rows: &[Vec<f64>], size: usize, seed: u64) -> Vec<Vec<f64>> {
    if rows.len() <= size {
        return rows.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = sample(&mut rng, rows.len(), size).into_vec();
    keep.sort_unstable();
    keep.into_iter().map(|i| rows[i].clone()).collect()
}

/// `|S|! (d-1-|S|)! / d!` for every coalition size.
fn coalition_weights(d: usize) -> Vec<f64> {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    (0..d).map(|s| fact(s) * fact(d - 1 - s) / fact(d)).collect()
}

/// Exact interventional Shapley values.
///
/// The value of a coalition `S` is the mean score over background rows with
/// the instance's values on `S` and the background row's values elsewhere.
/// All `2^d` coalitions are evaluated.
pub fn shapley(score: &dyn Fn(&[f64]) -> f64, instance: &[f64], background: &[Vec<f64>]) -> Result<Attribution> {
    if background.is_empty() {
        return Err(Error::EmptyBackground);
    }
    let d = instance.len();
    if let Some(b) = background.iter().find(|b| b.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: b.len(),
        });
    }
    let coalitions = 1usize << d;
    let mut value = alloc::vec![0.0; coalitions];
    let mut point = alloc::vec![0.0; d];
    for (mask, v) in value.iter_mut().enumerate() {
        let mut total = 0.0;
        for b in background {
            for j in 0..d {
                point[j] = if mask >> j & 1 == 1 { instance[j] } else { b[j] };
            }
            total += score(&point);
        }
        *v = total / background.len() as f64;
    }
    let weights = coalition_weights(d);
    let phi = (0..d)
        .map(|i| {
            let bit = 1usize << i;
            (0..coalitions)
                .filter(|m| m & bit == 0)
                .map(|m| weights[m.count_ones() as usize] * (value[m | bit] - value[m]))
                .sum()
        })
        .collect();
    Ok(Attribution {
        phi,
        base_value: value[0],
        score: score(instance),
    })
}

/// Exact interventional Shapley values of a fitted classifier.
///
/// Trees and forests are walked per background row, which gives the same
/// values as [`shapley`] without enumerating coalitions; other models use
/// [`shapley`] directly.
pub fn explain_model(model: &Classifier, instance: &[f64], background: &[Vec<f64>]) -> Result<Attribution> {
    let trees: &[DecisionTree] = match model {
        Classifier::DecisionTree(t) => core::slice::from_ref(t),
        Classifier::RandomForest(f) => f.trees(),
        _ => return shapley(&|p| model.score(p), instance, background),
    };
    let d = model.dim();
    if instance.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: instance.len(),
        });
    }
    if background.is_empty() {
        return Err(Error::EmptyBackground);
    }
    if let Some(b) = background.iter().find(|b| b.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: b.len(),
        });
    }
    if d > 64 {
        return shapley(&|p| model.score(p), instance, background);
    }
    let weight = 1.0 / (trees.len() * background.len()) as f64;
    let mut phi = alloc::vec![0.0; d];
    for b in background {
        for t in trees {
            t.add_interventional_shapley(instance, b, weight, &mut phi);
        }
    }
    let base_value = background.iter().map(|b| model.score(b)).sum::<f64>() / background.len() as f64;
    Ok(Attribution {
        phi,
        base_value,
        score: model.score(instance),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub mean_abs_phi: f64,
}

/// Mean `|phi|` per feature, most important first; ties keep feature order.
pub fn global_importance(attributions: &[Attribution]) -> Vec<FeatureImportance> {
    let d = attributions.first().map_or(FEATURE_NAMES.len(), |a| a.phi.len());
    let n = attributions.len().max(1) as f64;
    let mut out: Vec<FeatureImportance> = (0..d)
        .map(|j| FeatureImportance {
            feature: FEATURE_NAMES.get(j).map_or_else(|| alloc::format!("x{j}"), |s| s.to_string()),
            mean_abs_phi: attributions.iter().map(|a| libm::fabs(a.phi[j])).sum::<f64>() / n,
        })
        .collect();
    // Stable sort keeps feature order among equal importances.
    out.sort_by(|a, b| b.mean_abs_phi.total_cmp(&a.mean_abs_phi));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceRow {
    /// Raw, unstandardized feature value.
    pub value: f64,
    pub phi: f64,
    pub label: bool,
}

/// One row per instance pairing the raw value of `feature` with its attribution.
pub fn dependence_export(
    feature: &str,
    raw: &[Vec<f64>],
    attributions: &[Attribution],
    labels: &[bool],
) -> Result<Vec<DependenceRow>> {
    let j = feature_index(feature)?;
    if raw.len() != attributions.len() {
        return Err(Error::LengthMismatch(raw.len(), attributions.len()));
    }
    if raw.len() != labels.len() {
        return Err(Error::LengthMismatch(raw.len(), labels.len()));
    }
    Ok(raw
        .iter()
        .zip(attributions)
        .zip(labels)
        .map(|((x, a), &label)| DependenceRow {
            value: x[j],
            phi: a.phi[j],
            label,
        })
        .collect())
}
