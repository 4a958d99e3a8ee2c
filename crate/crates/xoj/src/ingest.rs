//! Log CSV and assignment config files.

use std::collections::HashMap;

use chrono::{DateTime, Datelike, NaiveDateTime, TimeZone, Utc};
use xoj_core::advice::AdviceConfig;
use xoj_core::data::feature_index;
use xoj_core::explain::Predicate;
use xoj_core::{AssignmentConfig, AssignmentId, BagKey, SubmissionRecord, Timestamp, Verdict};

pub const LOG_HEADER: [&str; 5] = ["student_id", "assignment", "timestamp", "verdict", "passed_assignment"];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IngestError {
    #[error("header must be `{}`", LOG_HEADER.join(","))]
    Header,
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl IngestError {
    fn row(row: usize, message: impl Into<String>) -> Self {
        IngestError::Row {
            row,
            message: message.into(),
        }
    }
}

/// Accepts RFC 3339 (any offset) and zone-less `YYYY-MM-DDTHH:MM[:SS]`
/// read as UTC, with an optional trailing `Z`.
pub fn parse_timestamp(text: &str) -> Option<Timestamp> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(Timestamp(t.timestamp()));
    }
    let bare = text.strip_suffix('Z').unwrap_or(text);
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(bare, f).ok())
        .map(|t| Timestamp(t.and_utc().timestamp()))
}

/// `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(t: Timestamp) -> String {
    match Utc.timestamp_opt(t.seconds(), 0).single() {
        Some(d) => d.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => t.seconds().to_string(),
    }
}

/// Parses a submission log. Rows are numbered from 1 after the header.
///
/// Output is sorted by `(student, assignment, time)`; rows with equal keys
/// keep their file order.
pub fn parse_log(text: &str, configs: &[AssignmentConfig]) -> Result<Vec<SubmissionRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| IngestError::Csv(e.to_string()))?;
    if header.iter().ne(LOG_HEADER.iter().copied()) {
        return Err(IngestError::Header);
    }
    let mut records = Vec::new();
    let mut passed: HashMap<BagKey, bool> = HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let n = i + 1;
        let row = row.map_err(|e| IngestError::row(n, e.to_string()))?;
        if row.len() != LOG_HEADER.len() {
            return Err(IngestError::row(n, format!("expected 5 fields, got {}", row.len())));
        }
        let student_id = row[0].to_string();
        if student_id.is_empty() {
            return Err(IngestError::row(n, "empty student_id"));
        }
        let assignment: AssignmentId = row[1]
            .parse()
            .map_err(|_| IngestError::row(n, format!("unknown assignment `{}`", &row[1])))?;
        let config = configs
            .iter()
            .find(|c| c.assignment == assignment)
            .ok_or_else(|| IngestError::row(n, format!("no configuration for assignment {assignment}")))?;
        let submitted_at =
            parse_timestamp(&row[2]).ok_or_else(|| IngestError::row(n, format!("unparseable timestamp `{}`", &row[2])))?;
        if submitted_at > config.deadline {
            return Err(IngestError::row(
                n,
                format!("timestamp {} is after the {assignment} deadline", &row[2]),
            ));
        }
        let verdict =
            Verdict::parse(&row[3]).ok_or_else(|| IngestError::row(n, format!("unknown verdict `{}`", &row[3])))?;
        let passed_assignment = match &row[4] {
            "1" => true,
            "0" => false,
            other => return Err(IngestError::row(n, format!("passed_assignment must be 0 or 1, got `{other}`"))),
        };
        let record = SubmissionRecord {
            student_id,
            assignment,
            submitted_at,
            verdict,
            passed_assignment,
        };
        if let Some(&seen) = passed.get(&record.key()) {
            if seen != passed_assignment {
                return Err(IngestError::row(
                    n,
                    format!("passed_assignment differs from earlier rows of {}", record.key()),
                ));
            }
        } else {
            passed.insert(record.key(), passed_assignment);
        }
        records.push(record);
    }
    records.sort_by(|a, b| {
        (&a.student_id, a.assignment, a.submitted_at).cmp(&(&b.student_id, b.assignment, b.submitted_at))
    });
    Ok(records)
}

pub fn write_log(records: &[SubmissionRecord]) -> Result<String, IngestError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| IngestError::Csv(e.to_string());
    w.write_record(LOG_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.student_id.as_str(),
            r.assignment.as_str(),
            &format_timestamp(r.submitted_at),
            r.verdict.as_str(),
            if r.passed_assignment { "1" } else { "0" },
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| IngestError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IngestError::Csv(e.to_string()))
}

/// Academic year of an instant, with years starting in September: a March
/// 2020 deadline belongs to `2019-20`.
pub fn academic_year(t: Timestamp) -> String {
    let d = Utc.timestamp_opt(t.seconds(), 0).single().unwrap_or_default();
    let start = if d.month() >= 9 { d.year() } else { d.year() - 1 };
    format!("{start}-{:02}", (start + 1).rem_euclid(100))
}

/// Non-empty `key=value` lines with their 1-based line numbers; `#` starts a
/// comment.
fn key_values(text: &str) -> Result<Vec<(usize, &str, &str)>, IngestError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| IngestError::ConfigLine {
            line: i + 1,
            message: format!("expected key=value, got `{line}`"),
        })?;
        out.push((i + 1, key.trim(), value.trim()));
    }
    Ok(out)
}

fn line_error(line: usize, message: String) -> IngestError {
    IngestError::ConfigLine { line, message }
}

/// Parses an assignment config.
///
/// Keys: `assignment`, `deadline`, `open_date`, optional `time_limit_s`
/// (default 10), `memory_limit_mb` (default 100) and `year`.
pub fn parse_config(text: &str) -> Result<AssignmentConfig, IngestError> {
    let mut assignment = None;
    let mut deadline = None;
    let mut open_date = None;
    let mut time_limit_s = AssignmentConfig::DEFAULT_TIME_LIMIT_S;
    let mut memory_limit_mb = AssignmentConfig::DEFAULT_MEMORY_LIMIT_MB;
    let mut year = None;
    for (line, key, value) in key_values(text)? {
        let bad = |message: String| line_error(line, message);
        let time = || parse_timestamp(value).ok_or_else(|| bad(format!("unparseable timestamp `{value}`")));
        let int = || value.parse::<u32>().map_err(|_| bad(format!("`{key}` must be a non-negative integer")));
        match key {
            "assignment" => {
                assignment = Some(
                    value
                        .parse::<AssignmentId>()
                        .map_err(|_| bad(format!("unknown assignment `{value}`")))?,
                )
            }
            "deadline" => deadline = Some(time()?),
            "open_date" => open_date = Some(time()?),
            "time_limit_s" => time_limit_s = int()?,
            "memory_limit_mb" => memory_limit_mb = int()?,
            "year" => year = Some(value.to_string()),
            _ => return Err(bad(format!("unknown key `{key}`"))),
        }
    }
    let missing = |k: &str| IngestError::Config(format!("missing `{k}`"));
    let deadline = deadline.ok_or_else(|| missing("deadline"))?;
    let config = AssignmentConfig {
        assignment: assignment.ok_or_else(|| missing("assignment"))?,
        deadline,
        open_date: open_date.ok_or_else(|| missing("open_date"))?,
        time_limit_s,
        memory_limit_mb,
        year_tag: year.unwrap_or_else(|| academic_year(deadline)),
    };
    config.validate().map_err(|e| IngestError::Config(e.to_string()))?;
    Ok(config)
}

/// Parses `feature<=value & feature>value ...`.
pub fn parse_rule(text: &str) -> Option<Vec<Predicate>> {
    text.split('&')
        .map(|part| {
            let part = part.trim();
            let (name, at_most, value) = match part.split_once("<=") {
                Some((n, v)) => (n, true, v),
                None => {
                    let (n, v) = part.split_once('>')?;
                    (n, false, v)
                }
            };
            Some(Predicate {
                feature: feature_index(name.trim()).ok()?,
                threshold: value.trim().parse().ok()?,
                at_most,
            })
        })
        .collect()
}

/// Advice thresholds. Unset keys keep their defaults.
///
/// Keys: `start_early_days`, `persist_submissions`, `persist_days`, and
/// either `risk_group` (a rule such as `days_to_deadline<=0.25 &
/// submissions_to_date<=37.5`) or `risk_cohort` (the name of an extracted
/// cohort, returned for the caller to resolve).
pub fn parse_advice(text: &str) -> Result<(AdviceConfig, Option<String>), IngestError> {
    let mut config = AdviceConfig::default();
    let mut cohort = None;
    for (line, key, value) in key_values(text)? {
        let bad = |message: String| line_error(line, message);
        let real = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("`{key}` must be a number")))
        };
        match key {
            "start_early_days" => config.start_early_days = real()?,
            "persist_days" => config.persist_days = real()?,
            "persist_submissions" => {
                config.persist_submissions = value
                    .parse()
                    .map_err(|_| bad(format!("`{key}` must be a non-negative integer")))?
            }
            "risk_group" => {
                config.risk_group = parse_rule(value).ok_or_else(|| bad(format!("unreadable rule `{value}`")))?
            }
            "risk_cohort" => cohort = Some(value.to_string()),
            _ => return Err(bad(format!("unknown key `{key}`"))),
        }
    }
    Ok((config, cohort))
}

pub fn write_config(config: &AssignmentConfig) -> String {
    format!(
        "assignment={}\nopen_date={}\ndeadline={}\ntime_limit_s={}\nmemory_limit_mb={}\nyear={}\n",
        config.assignment,
        format_timestamp(config.open_date),
        format_timestamp(config.deadline),
        config.time_limit_s,
        config.memory_limit_mb,
        config.year_tag
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a1() -> AssignmentConfig {
        parse_config("assignment=A1\nopen_date=2020-03-01T00:00:00Z\ndeadline=2020-03-21T00:00Z\n").unwrap()
    }

    const HEADER: &str = "student_id,assignment,timestamp,verdict,passed_assignment\n";

    #[test]
    fn header_only() {
        assert!(parse_log(HEADER, &[a1()]).unwrap().is_empty());
    }

    #[test]
    fn one_row() {
        let text = format!("{HEADER}s1,A1,2020-03-18T12:00:00Z,test_error,1\n");
        let r = parse_log(&text, &[a1()]).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].verdict, Verdict::TestError);
        assert!(r[0].passed_assignment);
    }

    #[test]
    fn inconsistent_pass_flag_names_row_two() {
        let text = format!("{HEADER}s1,A1,2020-03-18T12:00:00Z,test_error,1\ns1,A1,2020-03-19T12:00:00Z,success,0\n");
        match parse_log(&text, &[a1()]).unwrap_err() {
            IngestError::Row { row, message } => {
                assert_eq!(row, 2);
                assert!(message.contains("passed_assignment"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn row_errors() {
        let cases = [
            ("s1,A1,2020-03-18T12:00:00Z,wrong_answer,0", "verdict"),
            ("s1,A1,2020-03-22T00:00:00Z,success,1", "after"),
            ("s1,A1,yesterday,success,1", "timestamp"),
            ("s1,A2,2020-03-18T12:00:00Z,success,1", "configuration"),
            ("s1,A1,2020-03-18T12:00:00Z,success,yes", "0 or 1"),
        ];
        for (row, needle) in cases {
            let text = format!("{HEADER}s0,A1,2020-03-02T00:00:00Z,success,1\n{row}\n");
            match parse_log(&text, &[a1()]).unwrap_err() {
                IngestError::Row { row, message } => {
                    assert_eq!(row, 2);
                    assert!(message.contains(needle), "{message}");
                }
                e => panic!("{e}"),
            }
        }
        assert_eq!(parse_log("a,b\n", &[a1()]).unwrap_err(), IngestError::Header);
    }

    #[test]
    fn sorted_output() {
        let text = format!(
            "{HEADER}s2,A1,2020-03-03T00:00:00Z,success,1\ns1,A1,2020-03-05T00:00:00Z,success,1\ns1,A1,2020-03-04T00:00:00Z,test_error,1\n"
        );
        let r = parse_log(&text, &[a1()]).unwrap();
        let order: Vec<(&str, i64)> = r.iter().map(|r| (r.student_id.as_str(), r.submitted_at.seconds())).collect();
        assert_eq!(order[0].0, "s1");
        assert!(order[0].1 < order[1].1);
        assert_eq!(order[2].0, "s2");
    }

    #[test]
    fn deadline_boundary_is_allowed() {
        let text = format!("{HEADER}s1,A1,2020-03-21T00:00:00Z,success,1\n");
        assert_eq!(parse_log(&text, &[a1()]).unwrap().len(), 1);
    }

    #[test]
    fn config_defaults_and_year() {
        let c = a1();
        assert_eq!(c.time_limit_s, 10);
        assert_eq!(c.memory_limit_mb, 100);
        assert_eq!(c.year_tag, "2019-20");
        assert_eq!(parse_config(&write_config(&c)).unwrap(), c);
        assert_eq!(academic_year(parse_timestamp("2020-10-01T00:00:00Z").unwrap()), "2020-21");
    }

    #[test]
    fn config_errors() {
        assert!(matches!(parse_config("deadline=2020-03-21T00:00:00Z\nopen_date=2020-03-01T00:00:00Z"), Err(IngestError::Config(_))));
        assert!(matches!(parse_config("assignment=A1\nfoo=1"), Err(IngestError::ConfigLine { line: 2, .. })));
        assert!(matches!(
            parse_config("assignment=A1\nopen_date=2020-03-21T00:00:00Z\ndeadline=2020-03-01T00:00:00Z"),
            Err(IngestError::Config(_))
        ));
    }

    #[test]
    fn advice_file() {
        let (c, cohort) = parse_advice("start_early_days=5\npersist_submissions=30\nrisk_cohort=C\n").unwrap();
        assert_eq!(c.start_early_days, 5.0);
        assert_eq!(c.persist_submissions, 30);
        assert_eq!(c.persist_days, 7.0);
        assert_eq!(cohort.as_deref(), Some("C"));
        let (c, _) = parse_advice("risk_group = days_to_deadline<=2.15 & days_to_deadline<=0.25 & submissions_to_date<=37.5").unwrap();
        assert_eq!(c, AdviceConfig::default());
        assert!(parse_advice("risk_group=nonsense<=1").is_err());
        assert_eq!(parse_rule("submissions_to_date>40").unwrap()[0].at_most, false);
    }

    #[test]
    fn timestamp_forms() {
        let t = parse_timestamp("2020-03-18T12:00:00Z").unwrap();
        assert_eq!(parse_timestamp("2020-03-18T12:00Z"), Some(t));
        assert_eq!(parse_timestamp("2020-03-18T13:00:00+01:00"), Some(t));
        assert_eq!(format_timestamp(t), "2020-03-18T12:00:00Z");
    }
}
