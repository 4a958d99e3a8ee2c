use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("feature `{0}` has zero variance in the training data")]
    DegenerateFeature(&'static str),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set contains a single class")]
    SingleClass,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("no configuration for assignment {0}")]
    MissingConfig(String),
    #[error("bag is empty")]
    EmptyBag,
    #[error("no positive bags in training set")]
    NoPositiveBags,
    #[error("class `{0}` has no samples")]
    EmptyClass(&'static str),
    #[error("{bags} bags cannot fill {folds} folds")]
    TooFewBags { bags: usize, folds: usize },
    #[error("fold assignment does not cover bag {0}")]
    UnassignedBag(String),
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("need at least {needed} non-zero differences, got {got}")]
    TooFewPairs { needed: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("background set is empty")]
    EmptyBackground,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("cohort {0} is empty")]
    EmptyCohort(String),
    #[error("cohort {0} covers the whole dataset")]
    CohortCoversAll(String),
    #[error("need at least {needed} cohorts, got {got}")]
    TooFewCohorts { needed: usize, got: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("infeasible archetype `{name}`: {reason}")]
    InfeasibleArchetype { name: String, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("results were computed on different folds")]
    FoldMismatch,
    #[error("invalid submission history: {0}")]
    InvalidHistory(String),
    #[error("submission at {submitted} is after the {assignment} deadline {deadline}")]
    AfterDeadline {
        assignment: String,
        submitted: i64,
        deadline: i64,
    },
}
