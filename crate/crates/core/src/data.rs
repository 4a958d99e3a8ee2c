//! Domain types shared by every stage of the pipeline.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Number of model inputs per submission.
pub const NUM_FEATURES: usize = 5;

/// Model input order. Indices into [`FeatureVector::to_point`] follow this list.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "days_to_deadline",
    "first_submission_days_to_deadline",
    "submissions_to_date",
    "submission_days_to_date",
    "assignment",
];

/// Index of the binary assignment indicator.
pub const ASSIGNMENT_FEATURE: usize = 4;

pub fn feature_index(name: &str) -> Result<usize> {
    FEATURE_NAMES
        .iter()
        .position(|&f| f == name)
        .ok_or_else(|| Error::UnknownFeature(name.to_string()))
}

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn seconds(self) -> i64 {
        self.0
    }

    /// Days since the epoch of the UTC calendar date containing this instant.
    pub fn utc_day(self) -> i64 {
        self.0.div_euclid(SECONDS_PER_DAY)
    }

    /// Fractional days from `self` until `later`.
    pub fn days_until(self, later: Timestamp) -> f64 {
        (later.0 - self.0) as f64 / SECONDS_PER_DAY as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AssignmentId {
    A1,
    A2,
}

impl AssignmentId {
    pub fn as_str(self) -> &'static str {
        match self {
            AssignmentId::A1 => "A1",
            AssignmentId::A2 => "A2",
        }
    }

    /// Value of the binary assignment descriptor.
    pub fn indicator(self) -> f64 {
        match self {
            AssignmentId::A1 => 0.0,
            AssignmentId::A2 => 1.0,
        }
    }
}

impl fmt::Display for AssignmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AssignmentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A1" => Ok(AssignmentId::A1),
            "A2" => Ok(AssignmentId::A2),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown assignment `{other}`"
            ))),
        }
    }
}

/// Outcome reported by the judge for one submission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    TestError,
    CompileError,
    TimeError,
    MemoryError,
    FunctionError,
}

impl Verdict {
    pub const ALL: [Verdict; 6] = [
        Verdict::Success,
        Verdict::TestError,
        Verdict::CompileError,
        Verdict::TimeError,
        Verdict::MemoryError,
        Verdict::FunctionError,
    ];

    pub const FAILURES: [Verdict; 5] = [
        Verdict::TestError,
        Verdict::CompileError,
        Verdict::TimeError,
        Verdict::MemoryError,
        Verdict::FunctionError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Success => "success",
            Verdict::TestError => "test_error",
            Verdict::CompileError => "compile_error",
            Verdict::TimeError => "time_error",
            Verdict::MemoryError => "memory_error",
            Verdict::FunctionError => "function_error",
        }
    }

    pub fn parse(token: &str) -> Option<Verdict> {
        Verdict::ALL.into_iter().find(|v| v.as_str() == token)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentConfig {
    pub assignment: AssignmentId,
    pub deadline: Timestamp,
    pub open_date: Timestamp,
    pub time_limit_s: u32,
    pub memory_limit_mb: u32,
    /// Academic-year label used to group summary rows, e.g. `2019-20`.
    pub year_tag: String,
}

impl AssignmentConfig {
    pub const DEFAULT_TIME_LIMIT_S: u32 = 10;
    pub const DEFAULT_MEMORY_LIMIT_MB: u32 = 100;

    pub fn new(
        assignment: AssignmentId,
        open_date: Timestamp,
        deadline: Timestamp,
        year_tag: impl Into<String>,
    ) -> Result<Self> {
        let config = AssignmentConfig {
            assignment,
            deadline,
            open_date,
            time_limit_s: Self::DEFAULT_TIME_LIMIT_S,
            memory_limit_mb: Self::DEFAULT_MEMORY_LIMIT_MB,
            year_tag: year_tag.into(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.open_date >= self.deadline {
            return Err(Error::InvalidConfig(alloc::format!(
                "{}: open_date must precede deadline",
                self.assignment
            )));
        }
        Ok(())
    }

    /// Length of the submission window in days.
    pub fn window_days(&self) -> f64 {
        self.open_date.days_until(self.deadline)
    }
}

pub fn find_config(configs: &[AssignmentConfig], id: AssignmentId) -> Result<&AssignmentConfig> {
    configs
        .iter()
        .find(|c| c.assignment == id)
        .ok_or_else(|| Error::MissingConfig(id.to_string()))
}

/// One raw judge event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub student_id: String,
    pub assignment: AssignmentId,
    pub submitted_at: Timestamp,
    pub verdict: Verdict,
    pub passed_assignment: bool,
}

impl SubmissionRecord {
    pub fn key(&self) -> BagKey {
        BagKey {
            student_id: self.student_id.clone(),
            assignment: self.assignment,
        }
    }
}

/// Identifies one student's attempt at one assignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BagKey {
    pub student_id: String,
    pub assignment: AssignmentId,
}

impl fmt::Display for BagKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.student_id, self.assignment)
    }
}

/// Descriptors of a single submission in raw units.
///
/// `verdict` is carried for reporting only; it is not a model input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub days_to_deadline: f64,
    pub first_submission_days_to_deadline: f64,
    pub submissions_to_date: u32,
    pub submission_days_to_date: u32,
    pub assignment: AssignmentId,
    pub success: bool,
    pub verdict: Verdict,
}

impl FeatureVector {
    /// Raw model inputs in [`FEATURE_NAMES`] order.
    pub fn to_point(&self) -> [f64; NUM_FEATURES] {
        [
            self.days_to_deadline,
            self.first_submission_days_to_deadline,
            f64::from(self.submissions_to_date),
            f64::from(self.submission_days_to_date),
            self.assignment.indicator(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bag {
    pub key: BagKey,
    /// Time-ordered submissions.
    pub instances: Vec<FeatureVector>,
    pub label: bool,
}

impl Bag {
    pub fn latest(&self) -> &FeatureVector {
        self.instances.last().expect("bags are non-empty")
    }

    pub fn raw_points(&self) -> Vec<Vec<f64>> {
        self.instances.iter().map(|f| f.to_point().to_vec()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub bags: Vec<Bag>,
    pub normalization: Option<crate::normalize::NormalizationStats>,
    pub provenance: String,
}

impl Dataset {
    pub fn instance_count(&self) -> usize {
        self.bags.iter().map(|b| b.instances.len()).sum()
    }

    /// All instances in bag order, then time order.
    pub fn instances(&self) -> impl Iterator<Item = &FeatureVector> {
        self.bags.iter().flat_map(|b| b.instances.iter())
    }

    pub fn positive_bags(&self) -> usize {
        self.bags.iter().filter(|b| b.label).count()
    }

    /// Keeps the bags selected by `keep`, by position.
    pub fn subset(&self, keep: impl Fn(usize) -> bool) -> Dataset {
        Dataset {
            bags: self
                .bags
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, b)| b.clone())
                .collect(),
            normalization: self.normalization.clone(),
            provenance: self.provenance.clone(),
        }
    }
}
