//! Deployable scoring artifact shared by the offline `predict` command and
//! the HTTP sidecar, so both give identical answers for identical input.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::advice::{advise, AdviceConfig, FeedbackReport};
use crate::classifiers::{Classifier, ClassifierSpec, Scorer};
use crate::data::{find_config, AssignmentConfig, AssignmentId, Dataset, FeatureVector, SubmissionRecord, Timestamp, Verdict};
use crate::explain::{extract_cohorts, explain_model, sample_background, CohortRule, DEFAULT_BACKGROUND, DEFAULT_MAX_LEAVES};
use crate::features::extract_features;
use crate::mil::{aggregate_max_confidence, mil_to_ml_train, standardize};
use crate::normalize::{NormalizationMethod, NormalizationStats};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub normalization: NormalizationMethod,
    pub background_size: usize,
    pub background_seed: u64,
    pub max_leaves: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            normalization: NormalizationMethod::ZScore,
            background_size: DEFAULT_BACKGROUND,
            background_seed: 0,
            max_leaves: DEFAULT_MAX_LEAVES,
        }
    }
}

/// One student's submissions to one assignment so far, current one last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRequest {
    pub student_id: String,
    pub assignment: AssignmentId,
    pub submitted_at: Timestamp,
    /// Earlier submissions, oldest first.
    #[serde(default)]
    pub history: Vec<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    pub format_version: u32,
    pub model_version: String,
    pub spec: ClassifierSpec,
    pub normalization: NormalizationStats,
    pub model: Classifier,
    /// Standardized background rows for Shapley values.
    pub background: Vec<Vec<f64>>,
    /// Rules only; member lists are dropped.
    pub cohorts: Vec<CohortRule>,
    pub advice: AdviceConfig,
    pub configs: Vec<AssignmentConfig>,
}

impl Predictor {
    /// Fits normalization, the instance model, background and cohorts on
    /// every bag of `dataset`.
    pub fn train(
        dataset: &Dataset,
        spec: &ClassifierSpec,
        configs: &[AssignmentConfig],
        advice: AdviceConfig,
        options: TrainOptions,
    ) -> Result<Self> {
        let instances: Vec<FeatureVector> = dataset.instances().cloned().collect();
        let normalization = NormalizationStats::fit(&instances, options.normalization)?;
        let bags = standardize(&dataset.bags, &normalization);
        let model = mil_to_ml_train(&bags, spec)?;
        let standardized: Vec<Vec<f64>> = bags.iter().flat_map(|b| b.points.iter().cloned()).collect();
        let background = sample_background(&standardized, options.background_size, options.background_seed);
        let raw: Vec<Vec<f64>> = instances.iter().map(|f| f.to_point().to_vec()).collect();
        let labels: Vec<bool> = instances.iter().map(|f| f.success).collect();
        let mut cohorts = extract_cohorts(&raw, &labels, options.max_leaves)?;
        cohorts.iter_mut().for_each(|c| c.members.clear());
        Ok(Predictor {
            format_version: FORMAT_VERSION,
            model_version: alloc::format!("{}-seed{}", spec.algorithm.name(), spec.seed),
            spec: spec.clone(),
            normalization,
            model,
            background,
            cohorts,
            advice,
            configs: configs.to_vec(),
        })
    }

    /// Checks the request and derives the descriptors of every submission.
    pub fn features(&self, request: &PredictionRequest) -> Result<Vec<FeatureVector>> {
        let config = find_config(&self.configs, request.assignment)?;
        let mut times = request.history.clone();
        times.push(request.submitted_at);
        if times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidHistory("history must be time-ordered and precede the submission".into()));
        }
        if request.student_id.is_empty() {
            return Err(Error::InvalidHistory("empty student id".into()));
        }
        if let Some(&late) = times.iter().find(|&&t| t > config.deadline) {
            return Err(Error::AfterDeadline {
                assignment: request.assignment.as_str().into(),
                submitted: late.seconds(),
                deadline: config.deadline.seconds(),
            });
        }
        let records: Vec<SubmissionRecord> = times
            .iter()
            .map(|&t| SubmissionRecord {
                student_id: request.student_id.clone(),
                assignment: request.assignment,
                submitted_at: t,
                // Outcome and verdict are unknown at prediction time and unused by the model.
                verdict: Verdict::TestError,
                passed_assignment: false,
            })
            .collect();
        Ok(extract_features(&records, &self.configs)?.into_iter().map(|(_, f)| f).collect())
    }

    /// Feedback for a bag given its time-ordered raw instances.
    pub fn feedback(&self, instances: &[FeatureVector]) -> Result<FeedbackReport> {
        let latest = instances.last().ok_or(Error::EmptyBag)?;
        let points: Vec<Vec<f64>> = instances.iter().map(|f| self.normalization.apply(f).to_vec()).collect();
        let scores: Vec<f64> = points.iter().map(|p| self.model.score(p)).collect();
        let bag = aggregate_max_confidence(&scores)?;
        let attribution = explain_model(&self.model, points.last().expect("non-empty"), &self.background)?;
        Ok(advise(bag.score, latest, &attribution, &self.cohorts, &self.advice))
    }

    pub fn predict(&self, request: &PredictionRequest) -> Result<FeedbackReport> {
        self.feedback(&self.features(request)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::Algorithm;
    use crate::features::build_bags;
    use crate::synth::{generate, planted_corpus};
    use alloc::vec;

    fn trained() -> Predictor {
        let c = planted_corpus("deadline_rushers", 80, 5).unwrap();
        let records = generate(&c).unwrap();
        let d = build_bags(extract_features(&records, &c.configs).unwrap(), "synthetic");
        let spec = ClassifierSpec::new(Algorithm::random_forest(20), 1);
        Predictor::train(&d, &spec, &c.configs, AdviceConfig::default(), TrainOptions::default()).unwrap()
    }

    #[test]
    fn early_healthy_student_gets_no_advice() {
        let p = trained();
        let deadline = p.configs[0].deadline.seconds();
        let r = p
            .predict(&PredictionRequest {
                student_id: "x".into(),
                assignment: AssignmentId::A1,
                submitted_at: Timestamp(deadline - 10 * 86_400),
                history: vec![],
            })
            .unwrap();
        assert!(r.advice.is_empty());
        assert!(r.success_probability > 0.5, "{}", r.success_probability);
        assert_eq!(r.top_factors.len(), 3);
    }

    #[test]
    fn late_rusher_is_at_risk() {
        let p = trained();
        let deadline = p.configs[0].deadline.seconds();
        let r = p
            .predict(&PredictionRequest {
                student_id: "x".into(),
                assignment: AssignmentId::A1,
                submitted_at: Timestamp(deadline - 3_600),
                history: vec![Timestamp(deadline - 7_200)],
            })
            .unwrap();
        assert!(r.success_probability < 0.5, "{}", r.success_probability);
        assert!(r.advice.iter().any(|a| a.id == crate::advice::AdviceId::RiskGroup));
    }

    #[test]
    fn rejects_bad_requests() {
        let p = trained();
        let deadline = p.configs[0].deadline;
        let late = PredictionRequest {
            student_id: "x".into(),
            assignment: AssignmentId::A1,
            submitted_at: Timestamp(deadline.seconds() + 1),
            history: vec![],
        };
        assert!(matches!(p.predict(&late), Err(Error::AfterDeadline { .. })));
        let unordered = PredictionRequest {
            submitted_at: Timestamp(deadline.seconds() - 100),
            history: vec![Timestamp(deadline.seconds() - 10)],
            ..late.clone()
        };
        assert!(matches!(p.predict(&unordered), Err(Error::InvalidHistory(_))));
        let missing = PredictionRequest {
            assignment: AssignmentId::A2,
            submitted_at: Timestamp(deadline.seconds() - 100),
            ..late
        };
        assert!(matches!(p.predict(&missing), Err(Error::MissingConfig(_))));
    }
}
