//! Bag-level learning.
//!
//! A bag holds every submission of one student for one assignment and carries
//! the student's pass/fail outcome. Instance learners are lifted to bags by
//! training on instances under their bag label and, at inference, keeping the
//! prediction of the single most confident instance.

mod apr;
mod citation;
mod emdd;
mod repr;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use apr::Apr;
pub use citation::{bag_distance, distance_matrix, BagDistance, CitationKnn};
pub use emdd::{affinity, log_diverse_density, EmDd};
pub use repr::{aggregate, Aggregation};

use crate::classifiers::{label_from_score, Classifier, ClassifierSpec, Scorer};
use crate::data::Bag;
use crate::normalize::NormalizationStats;
use crate::{Error, Result};

/// Standardized instances of one bag with its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceBag {
    pub points: Vec<Vec<f64>>,
    pub label: bool,
}

impl InstanceBag {
    /// Standardizes every instance of `bag` with `stats`.
    pub fn from_bag(bag: &Bag, stats: &NormalizationStats) -> Self {
        InstanceBag {
            points: bag.instances.iter().map(|f| stats.apply(f).to_vec()).collect(),
            label: bag.label,
        }
    }
}

pub fn standardize(bags: &[Bag], stats: &NormalizationStats) -> Vec<InstanceBag> {
    bags.iter().map(|b| InstanceBag::from_bag(b, stats)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BagPrediction {
    pub label: bool,
    pub confidence: f64,
    /// Success score used for ranking bags (AUC).
    pub score: f64,
}

/// Instances in bag order then time order, each under its bag's label.
pub fn flatten(bags: &[InstanceBag]) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for bag in bags {
        for p in &bag.points {
            xs.push(p.clone());
            ys.push(bag.label);
        }
    }
    (xs, ys)
}

pub fn mil_to_ml_train(bags: &[InstanceBag], inner: &ClassifierSpec) -> Result<Classifier> {
    let (xs, ys) = flatten(bags);
    inner.fit(&xs, &ys)
}

/// Max-confidence aggregation of per-instance success scores.
///
/// Confidence of an instance is `max(s, 1 - s)`. The bag takes the label and
/// score of the most confident instance; among equally confident instances a
/// failure prediction wins, then the earliest.
pub fn aggregate_max_confidence(scores: &[f64]) -> Result<BagPrediction> {
    let mut best: Option<BagPrediction> = None;
    for &s in scores {
        let candidate = BagPrediction {
            label: label_from_score(s),
            confidence: s.max(1.0 - s),
            score: s,
        };
        best = match best {
            None => Some(candidate),
            Some(b) if candidate.confidence > b.confidence => Some(candidate),
            Some(b) if candidate.confidence == b.confidence && b.label && !candidate.label => Some(candidate),
            keep => keep,
        };
    }
    best.ok_or(Error::EmptyBag)
}

pub fn mil_to_ml_predict<S: Scorer + ?Sized>(model: &S, bag: &[Vec<f64>]) -> Result<BagPrediction> {
    let scores: Vec<f64> = bag.iter().map(|x| model.score(x)).collect();
    aggregate_max_confidence(&scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum MilSpec {
    CitationKnn {
        #[serde(default = "defaults::references")]
        references: usize,
        #[serde(default = "defaults::citations")]
        citations: usize,
        #[serde(default)]
        distance: BagDistance,
    },
    Apr {
        #[serde(default = "defaults::half")]
        threshold: f64,
        #[serde(default = "defaults::epsilon")]
        epsilon: f64,
        #[serde(default = "defaults::step")]
        step: f64,
    },
    EmDd {
        #[serde(default = "defaults::scale")]
        scale: f64,
        #[serde(default = "defaults::epochs")]
        epochs: usize,
        #[serde(default = "defaults::half")]
        threshold: f64,
        /// Caps the number of restarts by seeded subsampling; all positive
        /// instances are tried when `None`.
        #[serde(default)]
        max_restarts: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    /// One aggregated summary per bag fed to an instance learner.
    BagRepresentation {
        #[serde(default)]
        aggregation: Aggregation,
        inner: ClassifierSpec,
    },
    MilToMl {
        inner: ClassifierSpec,
    },
}

mod defaults {
    pub fn references() -> usize {
        1
    }
    pub fn citations() -> usize {
        3
    }
    pub fn half() -> f64 {
        0.5
    }
    pub fn epsilon() -> f64 {
        0.05
    }
    pub fn step() -> f64 {
        1.0
    }
    pub fn scale() -> f64 {
        1.0
    }
    pub fn epochs() -> usize {
        10
    }
}

impl MilSpec {
    pub fn citation_knn() -> Self {
        MilSpec::CitationKnn {
            references: defaults::references(),
            citations: defaults::citations(),
            distance: BagDistance::default(),
        }
    }

    pub fn apr() -> Self {
        MilSpec::Apr {
            threshold: defaults::half(),
            epsilon: defaults::epsilon(),
            step: defaults::step(),
        }
    }

    pub fn em_dd(seed: u64) -> Self {
        MilSpec::EmDd {
            scale: defaults::scale(),
            epochs: defaults::epochs(),
            threshold: defaults::half(),
            max_restarts: None,
            seed,
        }
    }

    pub fn mean_representation(inner: ClassifierSpec) -> Self {
        MilSpec::BagRepresentation {
            aggregation: Aggregation::Mean,
            inner,
        }
    }

    pub fn mapped(inner: ClassifierSpec) -> Self {
        MilSpec::MilToMl { inner }
    }

    /// Short identifier used in reports and file names.
    pub fn name(&self) -> alloc::string::String {
        use alloc::string::ToString;
        match self {
            MilSpec::CitationKnn { .. } => "citation_knn".to_string(),
            MilSpec::Apr { .. } => "apr".to_string(),
            MilSpec::EmDd { .. } => "em_dd".to_string(),
            MilSpec::BagRepresentation { aggregation, inner } => {
                alloc::format!("{}+{}", aggregation.name(), inner.algorithm.name())
            }
            MilSpec::MilToMl { inner } => inner.algorithm.name().to_string(),
        }
    }

    pub fn fit(&self, bags: &[InstanceBag]) -> Result<MilModel> {
        if bags.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if bags.iter().any(|b| b.points.is_empty()) {
            return Err(Error::EmptyBag);
        }
        let model = match self {
            MilSpec::CitationKnn {
                references,
                citations,
                distance,
            } => MilModel::CitationKnn(CitationKnn::fit(bags, *references, *citations, *distance)?),
            MilSpec::Apr {
                threshold,
                epsilon,
                step,
            } => MilModel::Apr(Apr::fit(bags, *threshold, *epsilon, *step)?),
            MilSpec::EmDd {
                scale,
                epochs,
                threshold,
                max_restarts,
                seed,
            } => MilModel::EmDd(EmDd::fit(bags, *scale, *epochs, *threshold, *max_restarts, *seed)?),
            MilSpec::BagRepresentation { aggregation, inner } => {
                let xs: Vec<Vec<f64>> = bags.iter().map(|b| aggregate(&b.points, *aggregation)).collect();
                let ys: Vec<bool> = bags.iter().map(|b| b.label).collect();
                MilModel::BagRepresentation {
                    aggregation: *aggregation,
                    model: inner.fit(&xs, &ys)?,
                }
            }
            MilSpec::MilToMl { inner } => MilModel::MilToMl(mil_to_ml_train(bags, inner)?),
        };
        Ok(model)
    }
}

/// A fitted bag-level model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", content = "state", rename_all = "snake_case")]
pub enum MilModel {
    CitationKnn(CitationKnn),
    Apr(Apr),
    EmDd(EmDd),
    BagRepresentation {
        aggregation: Aggregation,
        model: Classifier,
    },
    MilToMl(Classifier),
}

impl MilModel {
    pub fn predict(&self, bag: &[Vec<f64>]) -> Result<BagPrediction> {
        if bag.is_empty() {
            return Err(Error::EmptyBag);
        }
        let expected = self.dim();
        if let Some(p) = bag.iter().find(|p| p.len() != expected) {
            return Err(Error::DimensionMismatch {
                expected,
                got: p.len(),
            });
        }
        Ok(match self {
            MilModel::CitationKnn(m) => m.predict(bag),
            MilModel::Apr(m) => m.predict(bag),
            MilModel::EmDd(m) => m.predict(bag),
            MilModel::BagRepresentation { aggregation, model } => {
                let s = model.score(&aggregate(bag, *aggregation));
                BagPrediction {
                    label: label_from_score(s),
                    confidence: s.max(1.0 - s),
                    score: s,
                }
            }
            MilModel::MilToMl(m) => mil_to_ml_predict(m, bag)?,
        })
    }

    fn dim(&self) -> usize {
        match self {
            MilModel::CitationKnn(m) => m.dim(),
            MilModel::Apr(m) => m.dim(),
            MilModel::EmDd(m) => m.dim(),
            MilModel::BagRepresentation { model, .. } => model.dim(),
            MilModel::MilToMl(m) => m.dim(),
        }
    }
}
