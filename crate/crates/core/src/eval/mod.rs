//! Bag-level evaluation: AUC, stratified folds, cross-validation and the
//! Wilcoxon tests behind model and cohort comparisons.

mod auc;
mod compare;
mod cv;
mod folds;
pub mod wilcoxon;

pub use auc::{auc, TieMode};
pub use compare::{comparison_matrix, ComparisonMatrix, LEVEL_90, LEVEL_95};
pub use cv::{cross_validate, held_out_scores, CvOptions, EvaluationResult, FoldScores};
pub use folds::{make_folds, FoldAssignment, DEFAULT_FOLDS};
pub use wilcoxon::{rank_sum, signed_rank, Alternative};
