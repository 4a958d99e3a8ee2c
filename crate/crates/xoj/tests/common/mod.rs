#![allow(dead_code)]

use xoj_core::advice::AdviceConfig;
use xoj_core::classifiers::{Algorithm, ClassifierSpec};
use xoj_core::features::{build_bags, extract_features};
use xoj_core::predictor::{Predictor, TrainOptions};
use xoj_core::synth::{generate, planted_corpus};
use xoj_core::{AssignmentConfig, Dataset};

pub fn corpus(students: usize, seed: u64) -> (Dataset, Vec<AssignmentConfig>) {
    let c = planted_corpus("deadline_rushers", students, seed).unwrap();
    let records = generate(&c).unwrap();
    (build_bags(extract_features(&records, &c.configs).unwrap(), "fixture"), c.configs)
}

pub fn predictor() -> Predictor {
    let (d, configs) = corpus(80, 1);
    let spec = ClassifierSpec::new(Algorithm::random_forest(25), 7);
    Predictor::train(&d, &spec, &configs, AdviceConfig::default(), TrainOptions::default()).unwrap()
}

pub fn stamp(seconds: i64) -> String {
    xoj::ingest::format_timestamp(xoj_core::Timestamp(seconds))
}
