//! Self-contained SVG charts. Output depends only on the input data.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use xoj_core::eval::{ComparisonMatrix, LEVEL_90, LEVEL_95};
use xoj_core::explain::{CohortImpact, DependenceRow, FeatureImportance};
use xoj_core::FEATURE_NAMES;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const PASS_COLOR: &str = "#1b9e77";
const FAIL_COLOR: &str = "#d95f02";
const BAR_COLOR: &str = "#4c72b0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plot", rename_all = "snake_case")]
pub enum PlotSpec {
    /// Mean AUC per model, with an optional dashed baseline.
    BarAuc {
        bars: Vec<(String, f64)>,
        baseline: Option<f64>,
    },
    ImportanceBar {
        rows: Vec<FeatureImportance>,
    },
    /// Raw feature value against its attribution, colored by outcome.
    DependenceScatter {
        feature: String,
        rows: Vec<DependenceRow>,
    },
    /// Mean positive (up) and negative (down) impact per feature and cohort.
    CohortBars {
        impacts: Vec<CohortImpact>,
    },
    ComparisonGrid {
        matrix: ComparisonMatrix,
    },
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SvgError {
    #[error("nothing to plot")]
    Empty,
    #[error("non-finite value in plot data")]
    NonFinite,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
        );
        let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"20.00\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
            WIDTH / 2.0,
            escape(title)
        );
        Canvas { out }
    }

    fn rect(&mut self, class: &str, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.out,
            "<rect class=\"{class}\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\" stroke=\"#333\" stroke-width=\"0.5\"/>"
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, text: &str) {
        let _ = writeln!(
            self.out,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\">{}</text>",
            escape(text)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, dashed: bool) {
        let dash = if dashed { " stroke-dasharray=\"4 3\"" } else { "" };
        let _ = writeln!(
            self.out,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#333\"{dash}/>"
        );
    }

    fn circle(&mut self, x: f64, y: f64, fill: &str) {
        let _ = writeln!(
            self.out,
            "<circle class=\"point\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{fill}\" fill-opacity=\"0.7\"/>"
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn check(values: impl IntoIterator<Item = f64>) -> Result<(), SvgError> {
    let mut any = false;
    for v in values {
        any = true;
        if !v.is_finite() {
            return Err(SvgError::NonFinite);
        }
    }
    if any {
        Ok(())
    } else {
        Err(SvgError::Empty)
    }
}

/// Vertical bars from zero; labels show values to 2 decimals.
fn bars(title: &str, bars: &[(String, f64)], baseline: Option<f64>) -> Result<String, SvgError> {
    if bars.is_empty() {
        return Err(SvgError::Empty);
    }
    check(bars.iter().map(|b| b.1).chain(baseline))?;
    let top = bars.iter().map(|b| b.1).chain(baseline).fold(0.0f64, f64::max).max(1e-12);
    let bottom = bars.iter().map(|b| b.1).fold(0.0f64, f64::min);
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let y_of = |v: f64| MARGIN + (top - v) / (top - bottom) * plot_h;
    let slot = (WIDTH - 2.0 * MARGIN) / bars.len() as f64;
    let mut c = Canvas::new(title);
    c.line(MARGIN, y_of(0.0), WIDTH - MARGIN, y_of(0.0), false);
    for (i, (label, v)) in bars.iter().enumerate() {
        let x = MARGIN + i as f64 * slot + 0.15 * slot;
        let (y0, y1) = (y_of(v.max(0.0)), y_of(v.min(0.0)));
        c.rect("bar", x, y0, 0.7 * slot, y1 - y0, BAR_COLOR);
        c.text(x + 0.35 * slot, y0 - 4.0, "middle", &format!("{v:.2}"));
        c.text(x + 0.35 * slot, HEIGHT - MARGIN + 16.0, "middle", label);
    }
    if let Some(b) = baseline {
        c.line(MARGIN, y_of(b), WIDTH - MARGIN, y_of(b), true);
        c.text(WIDTH - MARGIN, y_of(b) - 4.0, "end", &format!("baseline {b:.2}"));
    }
    Ok(c.finish())
}

fn scatter(feature: &str, rows: &[DependenceRow]) -> Result<String, SvgError> {
    check(rows.iter().flat_map(|r| [r.value, r.phi]))?;
    let span = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x_lo, x_hi) = span(&mut rows.iter().map(|r| r.value));
    let (y_lo, y_hi) = span(&mut rows.iter().map(|r| r.phi));
    let x_of = |v: f64| MARGIN + (v - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let y_of = |v: f64| HEIGHT - MARGIN - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);
    let mut c = Canvas::new(&format!("Shapley dependence: {feature}"));
    c.line(MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, false);
    c.line(MARGIN, MARGIN, MARGIN, HEIGHT - MARGIN, false);
    if y_lo < 0.0 && y_hi > 0.0 {
        c.line(MARGIN, y_of(0.0), WIDTH - MARGIN, y_of(0.0), true);
    }
    for r in rows {
        c.circle(x_of(r.value), y_of(r.phi), if r.label { PASS_COLOR } else { FAIL_COLOR });
    }
    c.text(MARGIN, HEIGHT - MARGIN + 16.0, "middle", &format!("{x_lo:.2}"));
    c.text(WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "middle", &format!("{x_hi:.2}"));
    c.text(MARGIN - 6.0, y_of(y_lo) + 4.0, "end", &format!("{y_lo:.2}"));
    c.text(MARGIN - 6.0, y_of(y_hi) + 4.0, "end", &format!("{y_hi:.2}"));
    c.text(WIDTH / 2.0, HEIGHT - 16.0, "middle", feature);
    c.text(WIDTH - MARGIN, MARGIN - 8.0, "end", "green: passed, orange: failed");
    Ok(c.finish())
}

fn cohort_bars(impacts: &[CohortImpact]) -> Result<String, SvgError> {
    check(impacts.iter().flat_map(|i| i.positive.iter().chain(&i.negative).copied()))?;
    let top = impacts
        .iter()
        .flat_map(|i| i.positive.iter().chain(&i.negative))
        .fold(0.0f64, |m, v| m.max(*v))
        .max(1e-12);
    let mid = HEIGHT / 2.0;
    let half = HEIGHT / 2.0 - MARGIN;
    let features = impacts.iter().map(|i| i.positive.len()).max().unwrap_or(0);
    let group = (WIDTH - 2.0 * MARGIN) / impacts.len() as f64;
    let bar = 0.8 * group / features.max(1) as f64;
    let mut c = Canvas::new("Mean positive and negative Shapley impact per cohort");
    c.line(MARGIN, mid, WIDTH - MARGIN, mid, false);
    for (g, imp) in impacts.iter().enumerate() {
        let x0 = MARGIN + g as f64 * group + 0.1 * group;
        for (j, (p, n)) in imp.positive.iter().zip(&imp.negative).enumerate() {
            let x = x0 + j as f64 * bar;
            let (hp, hn) = (p / top * half, n / top * half);
            c.rect("bar", x, mid - hp, bar * 0.9, hp, PASS_COLOR);
            c.rect("bar", x, mid, bar * 0.9, hn, FAIL_COLOR);
            c.text(x + bar * 0.45, mid - hp - 3.0, "middle", &format!("{p:.2}"));
            c.text(x + bar * 0.45, mid + hn + 11.0, "middle", &format!("{n:.2}"));
        }
        c.text(x0 + 0.4 * group, HEIGHT - MARGIN + 24.0, "middle", &format!("cohort {} (n={})", imp.cohort, imp.members));
    }
    let legend: Vec<String> = (0..features)
        .map(|j| format!("{}={}", j + 1, FEATURE_NAMES.get(j).copied().unwrap_or("?")))
        .collect();
    c.text(WIDTH / 2.0, HEIGHT - 12.0, "middle", &format!("bars in feature order: {}", legend.join(", ")));
    Ok(c.finish())
}

fn grid(m: &ComparisonMatrix) -> Result<String, SvgError> {
    if m.models.is_empty() {
        return Err(SvgError::Empty);
    }
    if m.p_values.iter().flatten().flatten().any(|p| !p.is_finite()) {
        return Err(SvgError::NonFinite);
    }
    let n = m.models.len();
    let left = 140.0;
    let cell = ((WIDTH - left - MARGIN) / n as f64).min((HEIGHT - 2.0 * MARGIN - 20.0) / n as f64);
    let mut c = Canvas::new("One-sided Wilcoxon p-values: row beats column");
    for (i, name) in m.models.iter().enumerate() {
        c.text(left - 6.0, MARGIN + 20.0 + (i as f64 + 0.5) * cell + 4.0, "end", name);
        c.text(left + (i as f64 + 0.5) * cell, MARGIN + 14.0, "middle", name);
        for j in 0..n {
            let p = m.p_values[i][j];
            let fill = match p {
                Some(p) if p < LEVEL_95 => "#2c7bb6",
                Some(p) if p < LEVEL_90 => "#abd9e9",
                Some(_) => "#f7f7f7",
                None => "#d9d9d9",
            };
            let (x, y) = (left + j as f64 * cell, MARGIN + 20.0 + i as f64 * cell);
            c.rect("cell", x, y, cell, cell, fill);
            let label = p.map_or_else(|| "n/a".to_string(), |p| format!("{p:.2}"));
            c.text(x + cell / 2.0, y + cell / 2.0 + 4.0, "middle", &label);
        }
    }
    c.text(
        WIDTH / 2.0,
        HEIGHT - 12.0,
        "middle",
        &format!("dark: p < {LEVEL_95:.2}, light: p < {LEVEL_90:.2}"),
    );
    Ok(c.finish())
}

pub fn render_svg(plot: &PlotSpec) -> Result<String, SvgError> {
    match plot {
        PlotSpec::BarAuc { bars: b, baseline } => bars("Mean bag AUC", b, *baseline),
        PlotSpec::ImportanceBar { rows } => {
            let b: Vec<(String, f64)> = rows.iter().map(|r| (r.feature.clone(), r.mean_abs_phi)).collect();
            bars("Mean |Shapley value| per feature", &b, None)
        }
        PlotSpec::DependenceScatter { feature, rows } => scatter(feature, rows),
        PlotSpec::CohortBars { impacts } => cohort_bars(impacts),
        PlotSpec::ComparisonGrid { matrix } => grid(matrix),
    }
}
