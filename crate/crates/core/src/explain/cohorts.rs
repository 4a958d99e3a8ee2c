use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::shapley::Attribution;
use crate::classifiers::tree::{DecisionTree, TreeParams};
use crate::data::FEATURE_NAMES;
use crate::eval::{rank_sum, Alternative};
use crate::{Error, Result};

pub const DEFAULT_MAX_LEAVES: usize = 4;
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// One threshold comparison on a raw feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub feature: usize,
    pub threshold: f64,
    /// `true` for `<=`, `false` for `>`.
    pub at_most: bool,
}

impl Predicate {
    pub fn holds(&self, x: &[f64]) -> bool {
        (x[self.feature] <= self.threshold) == self.at_most
    }

    pub fn describe(&self) -> String {
        let op = if self.at_most { "<=" } else { ">" };
        alloc::format!("{} {op} {:.2}", FEATURE_NAMES[self.feature], self.threshold)
    }
}

/// A subgroup of submissions defined by a conjunction of thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRule {
    pub name: String,
    pub predicates: Vec<Predicate>,
    /// Indices of member instances.
    pub members: Vec<usize>,
    /// Members with a passing outcome.
    pub positives: usize,
}

impl CohortRule {
    pub fn matches(&self, raw: &[f64]) -> bool {
        self.predicates.iter().all(|p| p.holds(raw))
    }

    pub fn describe(&self) -> String {
        if self.predicates.is_empty() {
            return "all submissions".to_string();
        }
        let parts: Vec<String> = self.predicates.iter().map(Predicate::describe).collect();
        parts.join(" & ")
    }

    pub fn pass_rate(&self) -> f64 {
        self.positives as f64 / self.members.len().max(1) as f64
    }
}

fn cohort_name(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        alloc::format!("{letter}{}", i / 26)
    }
}

/// Partitions raw instances with a best-first Gini tree of at most
/// `max_leaves` leaves. Cohorts are named A, B, ... from left to right.
pub fn extract_cohorts(raw: &[Vec<f64>], labels: &[bool], max_leaves: usize) -> Result<Vec<CohortRule>> {
    if max_leaves == 0 {
        return Err(Error::InvalidHyperparameter("max_leaves must be ≥ 1".into()));
    }
    if raw.len() != labels.len() {
        return Err(Error::LengthMismatch(raw.len(), labels.len()));
    }
    if raw.len() < max_leaves {
        return Err(Error::TooFewSamples {
            needed: max_leaves,
            got: raw.len(),
        });
    }
    if labels.iter().all(|&y| y == labels[0]) {
        return Ok(alloc::vec![CohortRule {
            name: "All".to_string(),
            predicates: Vec::new(),
            members: (0..raw.len()).collect(),
            positives: labels.iter().filter(|&&y| y).count(),
        }]);
    }
    let params = TreeParams {
        max_leaves: Some(max_leaves),
        ..TreeParams::default()
    };
    let tree = DecisionTree::fit(raw, labels, &params);
    let paths = tree.leaf_paths();
    let mut cohorts: Vec<CohortRule> = paths
        .iter()
        .enumerate()
        .map(|(i, (_, steps))| CohortRule {
            name: cohort_name(i),
            predicates: steps
                .iter()
                .map(|s| Predicate {
                    feature: s.feature,
                    threshold: s.threshold,
                    at_most: s.left,
                })
                .collect(),
            members: Vec::new(),
            positives: 0,
        })
        .collect();
    for (i, x) in raw.iter().enumerate() {
        let leaf = tree.leaf_for(x);
        let c = paths.iter().position(|(id, _)| *id == leaf).expect("every leaf has a path");
        cohorts[c].members.push(i);
        cohorts[c].positives += usize::from(labels[i]);
    }
    Ok(cohorts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortImpact {
    pub cohort: String,
    pub members: usize,
    /// Mean of `max(phi, 0)` per feature.
    pub positive: Vec<f64>,
    /// Mean of `max(-phi, 0)` per feature.
    pub negative: Vec<f64>,
}

pub fn cohort_impacts(cohorts: &[CohortRule], attributions: &[Attribution]) -> Result<Vec<CohortImpact>> {
    cohorts
        .iter()
        .map(|c| {
            if c.members.is_empty() {
                return Err(Error::EmptyCohort(c.name.clone()));
            }
            let d = attributions.first().map_or(0, |a| a.phi.len());
            let mut positive = alloc::vec![0.0; d];
            let mut negative = alloc::vec![0.0; d];
            for &m in &c.members {
                let a = attributions.get(m).ok_or(Error::LengthMismatch(m + 1, attributions.len()))?;
                for (j, &phi) in a.phi.iter().enumerate() {
                    positive[j] += phi.max(0.0);
                    negative[j] += (-phi).max(0.0);
                }
            }
            let n = c.members.len() as f64;
            positive.iter_mut().chain(negative.iter_mut()).for_each(|v| *v /= n);
            Ok(CohortImpact {
                cohort: c.name.clone(),
                members: c.members.len(),
                positive,
                negative,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSignificance {
    pub cohort: String,
    pub p_value: f64,
    pub significant: bool,
}

/// Two-sided rank-sum test of member outcomes against the complement's.
pub fn cohort_significance(cohorts: &[CohortRule], labels: &[bool]) -> Result<Vec<CohortSignificance>> {
    if cohorts.len() < 2 {
        return Err(Error::TooFewCohorts {
            needed: 2,
            got: cohorts.len(),
        });
    }
    cohorts
        .iter()
        .map(|c| {
            if c.members.is_empty() {
                return Err(Error::EmptyCohort(c.name.clone()));
            }
            let mut inside = alloc::vec![false; labels.len()];
            for &m in &c.members {
                inside[m] = true;
            }
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for (i, &y) in labels.iter().enumerate() {
                let v = if y { 1.0 } else { 0.0 };
                if inside[i] {
                    a.push(v);
                } else {
                    b.push(v);
                }
            }
            if b.is_empty() {
                return Err(Error::CohortCoversAll(c.name.clone()));
            }
            let p_value = rank_sum(&a, &b, Alternative::TwoSided)?;
            Ok(CohortSignificance {
                cohort: c.name.clone(),
                p_value,
                significant: p_value < SIGNIFICANCE_LEVEL,
            })
        })
        .collect()
}
