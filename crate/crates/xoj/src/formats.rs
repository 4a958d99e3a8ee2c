//! Versioned JSON envelopes and CSV tables for every artifact.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use xoj_core::eval::{ComparisonMatrix, EvaluationResult};
use xoj_core::explain::{Attribution, CohortImpact, CohortRule, CohortSignificance, DependenceRow, FeatureImportance};
use xoj_core::features::SummaryRow;
use xoj_core::{BagKey, FEATURE_NAMES};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected a `{expected}` artifact, found `{found}`")]
    Kind { expected: String, found: String },
    #[error("unsupported schema version {found} (this build reads {SCHEMA_VERSION})")]
    Version { found: u32 },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub kind: String,
    pub schema_version: u32,
    pub payload: T,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(kind: &str, payload: &T) -> Result<String, FormatError> {
    let envelope = Envelope {
        kind: kind.to_string(),
        schema_version: SCHEMA_VERSION,
        payload,
    };
    let mut s = serde_json::to_string_pretty(&envelope)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T, FormatError> {
    let envelope: Envelope<serde_json::Value> = serde_json::from_str(text)?;
    if envelope.kind != kind {
        return Err(FormatError::Kind {
            expected: kind.to_string(),
            found: envelope.kind,
        });
    }
    if envelope.schema_version != SCHEMA_VERSION {
        return Err(FormatError::Version {
            found: envelope.schema_version,
        });
    }
    Ok(serde_json::from_value(envelope.payload)?)
}

/// Shortest round-tripping form, with an exponent for very small or large
/// magnitudes.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).unwrap_or_else(|_| format!("{v}"))
    } else {
        format!("{v}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing to memory cannot fail.
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields")
}

/// Per-fold AUCs of the model and the baseline, then a `mean` row.
pub fn evaluation_csv(r: &EvaluationResult) -> String {
    let folds = r
        .fold_aucs
        .iter()
        .zip(&r.baseline_fold_aucs)
        .enumerate()
        .map(|(f, (m, b))| vec![r.model.clone(), f.to_string(), opt(*m), opt(*b)]);
    let mean = vec![r.model.clone(), "mean".into(), num(r.mean_auc), num(r.baseline_mean_auc)];
    table(&["model", "fold", "auc", "baseline_auc"], folds.chain([mean]))
}

/// One-sided p-value that the row model beats the column model.
pub fn comparison_csv(m: &ComparisonMatrix) -> String {
    let mut header = vec!["model"];
    header.extend(m.models.iter().map(String::as_str));
    let rows = m
        .models
        .iter()
        .zip(&m.p_values)
        .map(|(name, ps)| std::iter::once(name.clone()).chain(ps.iter().map(|p| opt(*p))).collect());
    table(&header, rows)
}

pub fn importance_csv(rows: &[FeatureImportance]) -> String {
    table(
        &["feature", "mean_abs_phi"],
        rows.iter().map(|r| vec![r.feature.clone(), num(r.mean_abs_phi)]),
    )
}

/// One row per explained instance.
pub fn attributions_csv(keys: &[(BagKey, u32)], attributions: &[Attribution]) -> String {
    let mut header = vec!["student_id", "assignment", "submission"];
    header.extend(FEATURE_NAMES.iter().copied());
    header.extend(["base_value", "score"]);
    let rows = keys.iter().zip(attributions).map(|((key, k), a)| {
        let mut row = vec![key.student_id.clone(), key.assignment.to_string(), k.to_string()];
        row.extend(a.phi.iter().map(|p| num(*p)));
        row.extend([num(a.base_value), num(a.score)]);
        row
    });
    table(&header, rows)
}

pub fn dependence_csv(rows: &[DependenceRow]) -> String {
    table(
        &["value", "phi", "label"],
        rows.iter().map(|r| vec![num(r.value), num(r.phi), u8::from(r.label).to_string()]),
    )
}

pub fn cohorts_csv(
    cohorts: &[CohortRule],
    significance: Option<&[CohortSignificance]>,
    impacts: Option<&[CohortImpact]>,
) -> String {
    let impact_names: Vec<String> = FEATURE_NAMES
        .iter()
        .flat_map(|f| [format!("{f}_positive"), format!("{f}_negative")])
        .collect();
    let mut header = vec!["cohort", "rule", "members", "positives", "pass_rate", "p_value", "significant"];
    header.extend(impact_names.iter().map(String::as_str));
    let rows = cohorts.iter().enumerate().map(|(i, c)| {
        let sig = significance.and_then(|s| s.get(i));
        let mut row = vec![
            c.name.clone(),
            c.describe(),
            c.members.len().to_string(),
            c.positives.to_string(),
            num(c.pass_rate()),
            sig.map(|s| num(s.p_value)).unwrap_or_default(),
            sig.map(|s| u8::from(s.significant).to_string()).unwrap_or_default(),
        ];
        match impacts.and_then(|im| im.get(i)) {
            Some(im) => row.extend(im.positive.iter().zip(&im.negative).flat_map(|(p, n)| [num(*p), num(*n)])),
            None => row.extend(std::iter::repeat_n(String::new(), 2 * FEATURE_NAMES.len())),
        }
        row
    });
    table(&header, rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    table(
        &[
            "year",
            "assignment",
            "students_total",
            "students_success",
            "students_failure",
            "attempts_total",
            "attempts_success_pct",
            "attempts_failure_pct",
            "avg_submissions_success",
            "avg_submissions_failure",
            "attempts_until_success",
        ],
        rows.iter().map(|r| {
            vec![
                r.year.clone(),
                r.assignment.to_string(),
                r.students_total.to_string(),
                r.students_success.to_string(),
                r.students_failure.to_string(),
                r.attempts_total.to_string(),
                num(r.attempts_success_pct),
                num(r.attempts_failure_pct),
                opt(r.avg_submissions_success),
                opt(r.avg_submissions_failure),
                opt(r.attempts_until_success),
            ]
        }),
    )
}
