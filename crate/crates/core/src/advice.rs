//! Actionable feedback rules evaluated on a student's latest submission.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{FeatureVector, FEATURE_NAMES};
use crate::explain::{Attribution, CohortRule, Predicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdviceId {
    StartEarly,
    Persist,
    RiskGroup,
}

impl AdviceId {
    pub fn as_str(self) -> &'static str {
        match self {
            AdviceId::StartEarly => "start_early",
            AdviceId::Persist => "persist",
            AdviceId::RiskGroup => "risk_group",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdviceConfig {
    /// `start_early` fires when the first submission came later than this.
    pub start_early_days: f64,
    /// `persist` fires below this many submissions...
    pub persist_submissions: u32,
    /// ...once the deadline is closer than this many days.
    pub persist_days: f64,
    /// Conjunction defining the risk group, on raw features.
    pub risk_group: Vec<Predicate>,
}

impl Default for AdviceConfig {
    fn default() -> Self {
        AdviceConfig {
            start_early_days: 7.0,
            persist_submissions: 40,
            persist_days: 7.0,
            risk_group: alloc::vec![
                Predicate { feature: 0, threshold: 2.15, at_most: true },
                Predicate { feature: 0, threshold: 0.25, at_most: true },
                Predicate { feature: 2, threshold: 37.5, at_most: true },
            ],
        }
    }
}

impl AdviceConfig {
    pub fn with_risk_group(self, cohort: &CohortRule) -> Self {
        AdviceConfig {
            risk_group: cohort.predicates.clone(),
            ..self
        }
    }

    pub fn fires(&self, id: AdviceId, latest: &FeatureVector) -> bool {
        match id {
            AdviceId::StartEarly => latest.first_submission_days_to_deadline < self.start_early_days,
            AdviceId::Persist => {
                latest.submissions_to_date < self.persist_submissions && latest.days_to_deadline < self.persist_days
            }
            AdviceId::RiskGroup => {
                !self.risk_group.is_empty() && self.risk_group.iter().all(|p| p.holds(&latest.to_point()))
            }
        }
    }

    fn message(&self, id: AdviceId) -> String {
        match id {
            AdviceId::StartEarly => alloc::format!(
                "Start earlier: submissions made more than {} days before the deadline tend to succeed.",
                self.start_early_days
            ),
            AdviceId::Persist => alloc::format!(
                "Keep submitting: students who make more than {} attempts tend to pass.",
                self.persist_submissions
            ),
            AdviceId::RiskGroup => {
                let rule: Vec<String> = self.risk_group.iter().map(Predicate::describe).collect();
                alloc::format!(
                    "You are in a risk group ({}): few submissions close to the deadline usually end in failure.",
                    rule.join(" & ")
                )
            }
        }
    }

    /// Advice whose predicate holds on `latest`, in a fixed order.
    pub fn evaluate(&self, latest: &FeatureVector) -> Vec<Advice> {
        [AdviceId::StartEarly, AdviceId::Persist, AdviceId::RiskGroup]
            .into_iter()
            .filter(|&id| self.fires(id, latest))
            .map(|id| Advice {
                id,
                message: self.message(id),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advice {
    pub id: AdviceId,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub feature: String,
    pub phi: f64,
}

pub const TOP_FACTORS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub success_probability: f64,
    /// `1 - success_probability`.
    pub risk_score: f64,
    pub advice: Vec<Advice>,
    /// Largest `|phi|` first.
    pub top_factors: Vec<Factor>,
    pub cohort: Option<String>,
}

/// Assembles feedback for one bag from its score, the attribution of its
/// latest instance and the cohort rules.
pub fn advise(
    success_probability: f64,
    latest: &FeatureVector,
    attribution: &Attribution,
    cohorts: &[CohortRule],
    config: &AdviceConfig,
) -> FeedbackReport {
    let raw = latest.to_point();
    FeedbackReport {
        success_probability,
        risk_score: 1.0 - success_probability,
        advice: config.evaluate(latest),
        top_factors: attribution
            .ranked()
            .into_iter()
            .take(TOP_FACTORS)
            .map(|j| Factor {
                feature: FEATURE_NAMES[j].to_string(),
                phi: attribution.phi[j],
            })
            .collect(),
        cohort: cohorts.iter().find(|c| c.matches(&raw)).map(|c| c.name.clone()),
    }
}
