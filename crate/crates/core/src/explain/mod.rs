//! Exact Shapley attribution over the descriptor space and decision-tree
//! cohort analysis.

mod cohorts;
mod shapley;

pub use cohorts::{
    cohort_impacts, cohort_significance, extract_cohorts, CohortImpact, CohortRule, CohortSignificance, Predicate,
    DEFAULT_MAX_LEAVES, SIGNIFICANCE_LEVEL,
};
pub use shapley::{
    dependence_export, explain_model, global_importance, sample_background, shapley, Attribution, DependenceRow, FeatureImportance,
    DEFAULT_BACKGROUND,
};
