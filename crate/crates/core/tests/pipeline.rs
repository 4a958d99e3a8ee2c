use proptest::prelude::*;
use xoj_core::classifiers::{Algorithm, ClassifierSpec};
use xoj_core::eval::{comparison_matrix, cross_validate, make_folds, CvOptions};
use xoj_core::features::{build_bags, extract_features, summarize};
use xoj_core::mil::MilSpec;
use xoj_core::synth::{generate, planted_corpus, preset_assignment, PRESET_NAMES};
use xoj_core::{AssignmentId, SubmissionRecord, Timestamp, Verdict, SECONDS_PER_DAY};

fn record(student: &str, t: i64, passed: bool) -> SubmissionRecord {
    SubmissionRecord {
        student_id: student.into(),
        assignment: AssignmentId::A1,
        submitted_at: Timestamp(t),
        verdict: Verdict::TestError,
        passed_assignment: passed,
    }
}

#[test]
fn descriptors_of_a_small_history() {
    let config = preset_assignment();
    let deadline = config.deadline.seconds();
    // Two submissions one UTC day, a third the next day, 2.5 days out at first.
    let first = deadline - 5 * SECONDS_PER_DAY / 2;
    let records = vec![
        record("s", first + 3_600, true),
        record("s", first, true),
        record("s", deadline - SECONDS_PER_DAY / 4, true),
    ];
    let features = extract_features(&records, &[config]).unwrap();
    let last = &features[2].1;
    assert_eq!(features[0].1.days_to_deadline, 2.5);
    assert_eq!(last.first_submission_days_to_deadline, 2.5);
    assert_eq!(last.days_to_deadline, 0.25);
    assert_eq!(last.submissions_to_date, 3);
    assert_eq!(last.submission_days_to_date, 2);
    assert_eq!(features[1].1.submission_days_to_date, 1);
}

#[test]
fn unknown_assignment_is_rejected() {
    let mut r = record("s", preset_assignment().deadline.seconds() - 10, false);
    r.assignment = AssignmentId::A2;
    assert!(extract_features(&[r], &[preset_assignment()]).is_err());
}

#[test]
fn every_learner_cross_validates_on_a_planted_corpus() {
    let c = planted_corpus("mixed", 60, 11).unwrap();
    let config = c.configs.clone();
    let d = build_bags(extract_features(&generate(&c).unwrap(), &config).unwrap(), "mixed");
    let folds = make_folds(&d, 4, 1).unwrap();
    let specs = [
        MilSpec::mapped(ClassifierSpec::new(Algorithm::naive_bayes(), 0)),
        MilSpec::mapped(ClassifierSpec::new(Algorithm::logistic_regression(), 0)),
        MilSpec::mapped(ClassifierSpec::new(Algorithm::knn(5), 0)),
        MilSpec::mapped(ClassifierSpec::new(Algorithm::decision_tree(), 0)),
        MilSpec::mapped(ClassifierSpec::new(Algorithm::random_forest(20), 0)),
        MilSpec::mean_representation(ClassifierSpec::new(Algorithm::logistic_regression(), 0)),
        MilSpec::citation_knn(),
        MilSpec::apr(),
    ];
    let results: Vec<_> = specs
        .iter()
        .map(|s| cross_validate(s, &d, &folds, CvOptions::default()).unwrap())
        .collect();
    for r in &results {
        assert_eq!(r.fold_aucs.len(), 4);
        assert!((0.0..=1.0).contains(&r.mean_auc), "{}: {}", r.model, r.mean_auc);
        assert!((0.0..=1.0).contains(&r.baseline_mean_auc));
    }
    let rf = &results[4];
    assert!(rf.mean_auc > rf.baseline_mean_auc, "forest {} vs baseline {}", rf.mean_auc, rf.baseline_mean_auc);
    let m = comparison_matrix(&results).unwrap();
    assert_eq!(m.models.len(), specs.len());
    assert!((0..specs.len()).all(|i| m.p_values[i][i].is_none()));
}

#[test]
fn summary_counts_agree_with_bags() {
    let c = planted_corpus("persistence_pays", 50, 2).unwrap();
    let records = generate(&c).unwrap();
    let d = build_bags(extract_features(&records, &c.configs).unwrap(), "p");
    let rows = summarize(&d, &c.configs).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].students_total, 50);
    assert_eq!(rows[0].students_success, d.positive_bags());
    assert_eq!(rows[0].attempts_total, records.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_logs_are_well_formed(preset in 0..PRESET_NAMES.len(), students in 1usize..40, seed in any::<u64>()) {
        let c = planted_corpus(PRESET_NAMES[preset], students, seed).unwrap();
        let records = generate(&c).unwrap();
        prop_assert_eq!(&records, &generate(&c).unwrap());
        let config = &c.configs[0];
        for r in &records {
            prop_assert!(r.submitted_at >= config.open_date && r.submitted_at <= config.deadline);
        }
        let d = build_bags(extract_features(&records, &c.configs).unwrap(), "prop");
        prop_assert_eq!(d.bags.len(), students);
        for bag in &d.bags {
            prop_assert!(bag.instances.iter().all(|v| v.success == bag.label));
            for (k, v) in bag.instances.iter().enumerate() {
                prop_assert_eq!(v.submissions_to_date as usize, k + 1);
                prop_assert!(v.submission_days_to_date as usize <= k + 1);
                prop_assert!(v.days_to_deadline <= v.first_submission_days_to_deadline);
                prop_assert!(v.days_to_deadline >= 0.0);
            }
        }
    }
}
