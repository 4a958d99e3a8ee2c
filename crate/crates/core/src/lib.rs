//! Core of the xoj toolkit: turns Online Judge submission histories into
//! student-risk scores with interpretable feedback.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the CLI
//! and the HTTP sidecar live in the `xoj` crate.
//!
//! Pipeline, bottom-up:
//!
//! - [`data`] and [`features`]: submission records, the five per-submission
//!   descriptors and per-(student, assignment) bags.
//! - [`normalize`]: standardization fitted on training data only.
//! - [`synth`]: seeded synthetic logs with planted pass/fail rules.
//! - [`classifiers`]: instance-level learners behind one scoring contract.
//! - [`mil`]: bag-level learners and the instance-to-bag max-confidence mapping.
//! - [`eval`]: AUC, bag-aware stratified folds, cross-validation and Wilcoxon tests.
//! - [`explain`]: exact Shapley attribution and decision-tree cohorts.
//! - [`advice`] and [`predictor`]: feedback rules and the deployable scoring artifact.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod advice;
pub mod classifiers;
pub mod data;
mod error;
pub mod eval;
pub mod explain;
pub mod features;
mod math;
pub mod mil;
pub mod normalize;
pub mod predictor;
pub mod synth;

pub use error::{Error, Result};

pub use data::{
    AssignmentConfig, AssignmentId, Bag, BagKey, Dataset, FeatureVector, SubmissionRecord,
    Timestamp, Verdict, FEATURE_NAMES, NUM_FEATURES, SECONDS_PER_DAY,
};
