use proptest::prelude::*;
use xoj::ingest::{academic_year, parse_config, parse_log, parse_timestamp, write_config, write_log, IngestError};
use xoj_core::synth::{generate, planted_corpus, preset_assignment, PRESET_NAMES};
use xoj_core::{AssignmentId, SubmissionRecord, Timestamp, Verdict};

const HEADER: &str = "student_id,assignment,timestamp,verdict,passed_assignment\n";

fn log(rows: &[&str]) -> String {
    let mut s = HEADER.to_string();
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

#[test]
fn parses_and_sorts_rows() {
    let text = log(&[
        "b,A1,2020-03-20T10:00:00Z,success,1",
        "a,A1,2020-03-19T10:00:00Z,test_error,0",
        "a,A1,2020-03-18T09:30:00Z,compile_error,0",
    ]);
    let records = parse_log(&text, &[preset_assignment()]).unwrap();
    let order: Vec<(&str, Verdict)> = records.iter().map(|r| (r.student_id.as_str(), r.verdict)).collect();
    assert_eq!(order, [("a", Verdict::CompileError), ("a", Verdict::TestError), ("b", Verdict::Success)]);
    assert!(!records[0].passed_assignment);
}

#[test]
fn rejects_bad_rows_with_their_number() {
    let configs = [preset_assignment()];
    let cases = [
        "a,A1,2020-03-22T00:00:00Z,success,1",
        "a,A2,2020-03-19T00:00:00Z,success,1",
        "a,A1,yesterday,success,1",
        "a,A1,2020-03-19T00:00:00Z,exploded,1",
        "a,A1,2020-03-19T00:00:00Z,success,2",
        ",A1,2020-03-19T00:00:00Z,success,1",
    ];
    for bad in cases {
        let text = log(&["ok,A1,2020-03-19T00:00:00Z,success,1", bad]);
        match parse_log(&text, &configs) {
            Err(IngestError::Row { row: 2, .. }) => {}
            other => panic!("{bad}: {other:?}"),
        }
    }
    let mixed = log(&["a,A1,2020-03-19T00:00:00Z,success,1", "a,A1,2020-03-20T00:00:00Z,success,0"]);
    assert!(parse_log(&mixed, &configs).is_err());
    assert_eq!(parse_log("id,when\n", &configs), Err(IngestError::Header));
}

#[test]
fn deadline_itself_is_accepted() {
    let text = log(&["a,A1,2020-03-21T00:00:00Z,success,1"]);
    assert_eq!(parse_log(&text, &[preset_assignment()]).unwrap().len(), 1);
}

#[test]
fn timestamps_and_years() {
    assert_eq!(parse_timestamp("2020-03-21T00:00:00Z"), Some(Timestamp(1_584_748_800)));
    assert_eq!(parse_timestamp("2020-03-21T01:00:00+01:00"), Some(Timestamp(1_584_748_800)));
    assert_eq!(parse_timestamp("2020-03-21 00:00:00"), Some(Timestamp(1_584_748_800)));
    assert_eq!(parse_timestamp("21/03/2020"), None);
    assert_eq!(academic_year(Timestamp(1_584_748_800)), "2019-20");
    assert_eq!(academic_year(parse_timestamp("2020-09-01T00:00:00Z").unwrap()), "2020-21");
}

#[test]
fn config_round_trip() {
    let config = preset_assignment();
    assert_eq!(parse_config(&write_config(&config)).unwrap(), config);
    let minimal = "assignment = A1\nopen_date = 2020-03-01T00:00:00Z\ndeadline = 2020-03-21T00:00:00Z\n";
    let parsed = parse_config(minimal).unwrap();
    assert_eq!(parsed.year_tag, "2019-20");
    assert_eq!(parsed.time_limit_s, 10);
    let backwards = "assignment = A1\nopen_date = 2020-03-22T00:00:00Z\ndeadline = 2020-03-21T00:00:00Z\n";
    assert!(parse_config(backwards).is_err());
}

#[test]
fn every_preset_log_survives_a_round_trip() {
    for seed in 0..100 {
        let c = planted_corpus(PRESET_NAMES[seed as usize % 3], 15, seed).unwrap();
        let records = generate(&c).unwrap();
        let text = write_log(&records).unwrap();
        assert_eq!(parse_log(&text, &c.configs).unwrap(), records, "seed {seed}");
    }
}

fn arb_record() -> impl Strategy<Value = SubmissionRecord> {
    let config = preset_assignment();
    let (open, deadline) = (config.open_date.seconds(), config.deadline.seconds());
    ("[a-z][a-z0-9_]{0,6}", open..=deadline, 0..Verdict::ALL.len()).prop_map(|(id, t, v)| SubmissionRecord {
        passed_assignment: id.len() % 2 == 0,
        student_id: id,
        assignment: AssignmentId::A1,
        submitted_at: Timestamp(t),
        verdict: Verdict::ALL[v],
    })
}

proptest! {
    #[test]
    fn write_then_parse_is_identity(records in proptest::collection::vec(arb_record(), 0..40)) {
        let mut sorted = records.clone();
        sorted.sort_by(|a, b| (&a.student_id, a.submitted_at).cmp(&(&b.student_id, b.submitted_at)));
        let text = write_log(&records).unwrap();
        prop_assert_eq!(parse_log(&text, &[preset_assignment()]).unwrap(), sorted);
    }
}
