//! Per-submission descriptors, bag assembly and cohort summary tables.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{find_config, AssignmentConfig, AssignmentId, Bag, BagKey, Dataset, FeatureVector, SubmissionRecord, Verdict};
use crate::Result;

/// Derives the descriptors for every record.
///
/// Output is in canonical `(student, assignment, time)` order regardless of the
/// input order; each entry is keyed by its bag.
pub fn extract_features(
    records: &[SubmissionRecord],
    configs: &[AssignmentConfig],
) -> Result<Vec<(BagKey, FeatureVector)>> {
    let mut order: Vec<&SubmissionRecord> = records.iter().collect();
    order.sort_by(|a, b| {
        (&a.student_id, a.assignment, a.submitted_at).cmp(&(&b.student_id, b.assignment, b.submitted_at))
    });

    let mut out = Vec::with_capacity(order.len());
    let mut start = 0;
    while start < order.len() {
        let head = order[start];
        let end = start
            + order[start..]
                .iter()
                .take_while(|r| r.student_id == head.student_id && r.assignment == head.assignment)
                .count();
        let config = find_config(configs, head.assignment)?;
        let key = head.key();
        let first_days = head.submitted_at.days_until(config.deadline);
        let mut days_seen: Vec<i64> = Vec::new();
        for (k, record) in order[start..end].iter().enumerate() {
            let day = record.submitted_at.utc_day();
            if !days_seen.contains(&day) {
                days_seen.push(day);
            }
            out.push((
                key.clone(),
                FeatureVector {
                    days_to_deadline: record.submitted_at.days_until(config.deadline),
                    first_submission_days_to_deadline: first_days,
                    submissions_to_date: (k + 1) as u32,
                    submission_days_to_date: days_seen.len() as u32,
                    assignment: record.assignment,
                    success: record.passed_assignment,
                    verdict: record.verdict,
                },
            ));
        }
        start = end;
    }
    Ok(out)
}

/// Groups keyed descriptors into one bag per `(student, assignment)`.
///
/// Instances keep their input order within a bag; bags come out in key order.
///
/// # Panics
///
/// If a group mixes success labels, which valid records never produce.
pub fn build_bags(features: Vec<(BagKey, FeatureVector)>, provenance: impl Into<String>) -> Dataset {
    let mut groups: BTreeMap<BagKey, Vec<FeatureVector>> = BTreeMap::new();
    for (key, fv) in features {
        groups.entry(key).or_default().push(fv);
    }
    let bags = groups
        .into_iter()
        .map(|(key, instances)| {
            let label = instances[0].success;
            assert!(
                instances.iter().all(|f| f.success == label),
                "bag {key} mixes success labels"
            );
            Bag { key, instances, label }
        })
        .collect();
    Dataset {
        bags,
        normalization: None,
        provenance: provenance.into(),
    }
}

/// One row of the per-course summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub year: String,
    pub assignment: AssignmentId,
    pub students_total: usize,
    pub students_success: usize,
    pub students_failure: usize,
    pub attempts_total: usize,
    /// Percentage of attempts with a `success` verdict.
    pub attempts_success_pct: f64,
    pub attempts_failure_pct: f64,
    /// Mean submissions per student who passed the assignment.
    pub avg_submissions_success: Option<f64>,
    pub avg_submissions_failure: Option<f64>,
    /// Mean 1-based index of the first `success` verdict among passing students.
    pub attempts_until_success: Option<f64>,
}

pub fn summarize(dataset: &Dataset, configs: &[AssignmentConfig]) -> Result<Vec<SummaryRow>> {
    let mut groups: BTreeMap<(String, AssignmentId), Vec<&Bag>> = BTreeMap::new();
    for bag in &dataset.bags {
        let config = find_config(configs, bag.key.assignment)?;
        groups
            .entry((config.year_tag.clone(), bag.key.assignment))
            .or_default()
            .push(bag);
    }

    let rows = groups
        .into_iter()
        .map(|((year, assignment), bags)| {
            let (passing, failing): (Vec<&Bag>, Vec<&Bag>) = bags.iter().partition(|b| b.label);
            let attempts_total: usize = bags.iter().map(|b| b.instances.len()).sum();
            let attempts_success = bags
                .iter()
                .flat_map(|b| &b.instances)
                .filter(|f| f.verdict == Verdict::Success)
                .count();
            let pct = |n: usize| {
                if attempts_total == 0 {
                    0.0
                } else {
                    100.0 * n as f64 / attempts_total as f64
                }
            };
            let until_success: Vec<f64> = passing
                .iter()
                .filter_map(|b| {
                    b.instances
                        .iter()
                        .position(|f| f.verdict == Verdict::Success)
                        .map(|i| (i + 1) as f64)
                })
                .collect();
            SummaryRow {
                year,
                assignment,
                students_total: bags.len(),
                students_success: passing.len(),
                students_failure: failing.len(),
                attempts_total,
                attempts_success_pct: pct(attempts_success),
                attempts_failure_pct: pct(attempts_total - attempts_success),
                avg_submissions_success: mean_len(&passing),
                avg_submissions_failure: mean_len(&failing),
                attempts_until_success: mean(&until_success),
            }
        })
        .collect();
    Ok(rows)
}

fn mean_len(bags: &[&Bag]) -> Option<f64> {
    let lens: Vec<f64> = bags.iter().map(|b| b.instances.len() as f64).collect();
    mean(&lens)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Timestamp;
    use alloc::string::ToString;
    use alloc::vec;

    // 2020-03-21T00:00:00Z
    const DEADLINE: i64 = 1_584_748_800;
    const HOUR: i64 = 3600;

    fn config() -> AssignmentConfig {
        AssignmentConfig::new(
            AssignmentId::A1,
            Timestamp(DEADLINE - 30 * 24 * HOUR),
            Timestamp(DEADLINE),
            "2019-20",
        )
        .unwrap()
    }

    fn record(student: &str, at: i64, verdict: Verdict, passed: bool) -> SubmissionRecord {
        SubmissionRecord {
            student_id: student.to_string(),
            assignment: AssignmentId::A1,
            submitted_at: Timestamp(at),
            verdict,
            passed_assignment: passed,
        }
    }

    #[test]
    fn days_to_deadline_is_fractional() {
        // 2020-03-18T12:00Z
        let r = record("s1", DEADLINE - 60 * HOUR, Verdict::TestError, true);
        let f = extract_features(&[r], &[config()]).unwrap();
        assert_eq!(f[0].1.days_to_deadline, 2.5);
    }

    #[test]
    fn first_submission_descriptors() {
        let r = record("s1", DEADLINE - 100 * HOUR, Verdict::TestError, false);
        let f = &extract_features(&[r], &[config()]).unwrap()[0].1;
        assert_eq!(f.submissions_to_date, 1);
        assert_eq!(f.submission_days_to_date, 1);
        assert_eq!(f.first_submission_days_to_deadline, f.days_to_deadline);
    }

    #[test]
    fn counts_distinct_utc_dates() {
        // Two submissions on 2020-03-18, one on 2020-03-19; fed out of order.
        let recs = vec![
            record("s1", DEADLINE - 40 * HOUR, Verdict::Success, true),
            record("s1", DEADLINE - 70 * HOUR, Verdict::TestError, true),
            record("s1", DEADLINE - 60 * HOUR, Verdict::TestError, true),
        ];
        let f = extract_features(&recs, &[config()]).unwrap();
        let third = &f[2].1;
        assert_eq!(third.submissions_to_date, 3);
        assert_eq!(third.submission_days_to_date, 2);
        assert_eq!(third.first_submission_days_to_deadline, 70.0 / 24.0);
        assert_eq!(third.verdict, Verdict::Success);
    }

    #[test]
    fn missing_config_is_reported() {
        let mut r = record("s1", DEADLINE - HOUR, Verdict::TestError, true);
        r.assignment = AssignmentId::A2;
        assert!(extract_features(&[r], &[config()]).is_err());
    }

    #[test]
    fn one_bag_per_student_assignment() {
        let recs: Vec<_> = (0..5)
            .map(|i| record("s1", DEADLINE - (10 - i) * HOUR, Verdict::TestError, true))
            .collect();
        let ds = build_bags(extract_features(&recs, &[config()]).unwrap(), "test");
        assert_eq!(ds.bags.len(), 1);
        assert_eq!(ds.bags[0].instances.len(), 5);
        assert!(ds.bags[0].label);
    }

    #[test]
    fn three_bags_for_two_students_two_assignments() {
        let mut a2 = config();
        a2.assignment = AssignmentId::A2;
        let mut recs = vec![
            record("s1", DEADLINE - HOUR, Verdict::TestError, true),
            record("s2", DEADLINE - HOUR, Verdict::TestError, false),
        ];
        let mut r = record("s1", DEADLINE - HOUR, Verdict::Success, true);
        r.assignment = AssignmentId::A2;
        recs.push(r);
        let ds = build_bags(extract_features(&recs, &[config(), a2]).unwrap(), "test");
        assert_eq!(ds.bags.len(), 3);
    }

    #[test]
    #[should_panic(expected = "mixes success labels")]
    fn mixed_labels_are_rejected() {
        let recs = vec![
            record("s1", DEADLINE - 2 * HOUR, Verdict::TestError, true),
            record("s1", DEADLINE - HOUR, Verdict::TestError, false),
        ];
        build_bags(extract_features(&recs, &[config()]).unwrap(), "test");
    }

    #[test]
    fn summary_counts_by_hand() {
        use Verdict::*;
        let pass = [TestError, CompileError, Success, Success, TestError];
        let mut recs: Vec<_> = pass
            .iter()
            .enumerate()
            .map(|(i, v)| record("s1", DEADLINE - (10 - i as i64) * HOUR, *v, true))
            .collect();
        recs.push(record("s2", DEADLINE - 5 * HOUR, TimeError, false));
        recs.push(record("s2", DEADLINE - 4 * HOUR, TestError, false));
        let ds = build_bags(extract_features(&recs, &[config()]).unwrap(), "test");
        let rows = summarize(&ds, &[config()]).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(row.year, "2019-20");
        assert_eq!((row.students_total, row.students_success, row.students_failure), (2, 1, 1));
        assert_eq!(row.attempts_total, 7);
        assert_eq!(row.attempts_until_success, Some(3.0));
        assert_eq!(row.avg_submissions_success, Some(5.0));
        assert_eq!(row.avg_submissions_failure, Some(2.0));
        assert!((row.attempts_success_pct - 200.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn empty_summary() {
        let ds = build_bags(Vec::new(), "empty");
        assert!(summarize(&ds, &[config()]).unwrap().is_empty());
    }
}
