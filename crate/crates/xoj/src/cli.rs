//! `xoj` command line. Exit status: 0 success, 1 invalid input or usage,
//! 2 internal failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use xoj_core::advice::{AdviceConfig, FeedbackReport};
use xoj_core::classifiers::{Algorithm, ClassifierSpec};
use xoj_core::eval::{comparison_matrix, cross_validate, make_folds, CvOptions, EvaluationResult, TieMode};
use xoj_core::explain::{
    cohort_impacts, cohort_significance, dependence_export, explain_model, extract_cohorts, global_importance,
    Attribution, CohortImpact, CohortRule, FeatureImportance, Predicate, DEFAULT_BACKGROUND, DEFAULT_MAX_LEAVES,
};
use xoj_core::features::{build_bags, extract_features, summarize, SummaryRow};
use xoj_core::mil::{Aggregation, MilSpec};
use xoj_core::normalize::NormalizationMethod;
use xoj_core::predictor::{Predictor, TrainOptions};
use xoj_core::synth::{generate, planted_corpus};
use xoj_core::{AssignmentConfig, BagKey, Dataset, FEATURE_NAMES};

use crate::formats::{self, from_json, to_json};
use crate::ingest::{parse_advice, parse_config, parse_log, write_config, write_log};
use crate::service::{self, AppState, PredictionResponse, WireRequest};
use crate::svg::{render_svg, PlotSpec};

#[derive(Parser, Debug)]
#[command(name = "xoj", version, about = "Student-risk prediction and feedback from Online Judge submission logs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a log and write the bagged dataset and summary table.
    Ingest(IngestArgs),
    /// Write a synthetic log from a planted preset.
    Simulate(SimulateArgs),
    /// Fit the deployable predictor on every bag of a log.
    Train(TrainArgs),
    /// Bag-level k-fold cross-validation against the majority baseline.
    Evaluate(EvaluateArgs),
    /// Pairwise Wilcoxon signed-rank comparison of evaluation results.
    Compare(CompareArgs),
    /// Shapley attributions, global importance and dependence plots.
    Explain(ExplainArgs),
    /// Decision-tree cohorts with significance tests.
    Cohorts(CohortArgs),
    /// Offline prediction for request files, as served by `serve`.
    Predict(PredictArgs),
    /// Per-student feedback report in JSON and Markdown.
    Report(ReportArgs),
    /// HTTP sidecar over a trained predictor.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
pub struct LogInput {
    /// Submission log CSV.
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// Assignment config file; repeat for several assignments.
    #[arg(long = "config", value_name = "FILE", required = true)]
    pub configs: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub log: LogInput,
    /// Dataset JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary table CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// deadline_rushers, persistence_pays or mixed.
    #[arg(long)]
    pub preset: String,
    #[arg(long, default_value_t = 200)]
    pub students: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Log CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the assignment config; defaults to the log path with
    /// a `.cfg` extension.
    #[arg(long)]
    pub config_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// baseline, nb, lr, knn, tree, rf, citation_knn, apr, emdd, or
    /// mean:<model> / median:<model> for bag summaries.
    #[arg(long, default_value = "rf")]
    pub model: String,
    /// Neighbours for knn.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Trees for rf.
    #[arg(long, default_value_t = 100)]
    pub estimators: usize,
    /// Caps EM-DD restarts by seeded subsampling.
    #[arg(long)]
    pub max_restarts: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum TieArg {
    Strict,
    Half,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum NormArg {
    Zscore,
    Minmax,
}

impl From<NormArg> for NormalizationMethod {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Zscore => NormalizationMethod::ZScore,
            NormArg::Minmax => NormalizationMethod::MinMax,
        }
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub log: LogInput,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Advice thresholds file.
    #[arg(long)]
    pub advice: Option<PathBuf>,
    /// Background rows for Shapley values.
    #[arg(long, default_value_t = DEFAULT_BACKGROUND)]
    pub background: usize,
    /// Cohort tree leaves.
    #[arg(long, default_value_t = DEFAULT_MAX_LEAVES)]
    pub leaves: usize,
    #[arg(long, value_enum, default_value_t = NormArg::Zscore)]
    pub normalization: NormArg,
    /// Predictor JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub log: LogInput,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Seeds both the folds and the learner.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = TieArg::Half)]
    pub ties: TieArg,
    #[arg(long, value_enum, default_value_t = NormArg::Zscore)]
    pub normalization: NormArg,
    /// Evaluates every hyperparameter grid point of kNN or random forest,
    /// writing one result per point with a `_k<k>` or `_est<n>` suffix.
    #[arg(long)]
    pub grid: bool,
    /// Output directory; receives `<model>.json`, `<model>.csv` and `<model>.svg`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Directory of evaluation JSON files computed on the same folds.
    #[arg(long)]
    pub results: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub log: LogInput,
    /// Predictor JSON from `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Features to export dependence plots for; all when omitted.
    #[arg(long)]
    pub feature: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CohortArgs {
    #[command(flatten)]
    pub log: LogInput,
    #[arg(long, default_value_t = DEFAULT_MAX_LEAVES)]
    pub leaves: usize,
    /// Predictor JSON; adds per-cohort Shapley impacts.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// JSON request, or an array of requests.
    #[arg(long)]
    pub request: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub log: LogInput,
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory; receives `report.json`, `report.md` and `summary.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Predictor JSON. Without it the service answers 503.
    #[arg(long, env = "XOJ_MODEL")]
    pub model: Option<PathBuf>,
    #[arg(long, env = "XOJ_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: String,
    /// Keep per-student submission history between requests.
    #[arg(long)]
    pub sessions: bool,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Invalid(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Internal(_) => 2,
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn invalid(self) -> Outcome<T>;
    fn internal(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn invalid(self) -> Outcome<T> {
        self.map_err(|e| Failure::Invalid(e.into()))
    }
    fn internal(self) -> Outcome<T> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .invalid()
}

fn write(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .internal()?;
    }
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .internal()
}

fn json<T: Serialize>(kind: &str, value: &T) -> Outcome<String> {
    to_json(kind, value).internal()
}

fn svg(plot: &PlotSpec) -> Outcome<String> {
    render_svg(plot).invalid()
}

fn load_predictor(path: &Path) -> Outcome<Predictor> {
    let p: Predictor = from_json("predictor", &read(path)?)
        .with_context(|| format!("loading {}", path.display()))
        .invalid()?;
    if p.format_version != xoj_core::predictor::FORMAT_VERSION {
        return Err(Failure::Invalid(anyhow!("unsupported predictor format {}", p.format_version)));
    }
    Ok(p)
}

struct Loaded {
    configs: Vec<AssignmentConfig>,
    dataset: Dataset,
}

fn load_log(log: &LogInput) -> Outcome<Loaded> {
    let configs = log
        .configs
        .iter()
        .map(|p| {
            parse_config(&read(p)?)
                .with_context(|| format!("in {}", p.display()))
                .invalid()
        })
        .collect::<Outcome<Vec<_>>>()?;
    let records = parse_log(&read(&log.input)?, &configs)
        .with_context(|| format!("in {}", log.input.display()))
        .invalid()?;
    if records.is_empty() {
        return Err(Failure::Invalid(anyhow!("{} has no submissions", log.input.display())));
    }
    let features = extract_features(&records, &configs).invalid()?;
    let dataset = build_bags(features, log.input.display().to_string());
    Ok(Loaded { configs, dataset })
}

fn instance_algorithm(name: &str, args: &ModelArgs) -> Option<Algorithm> {
    Some(match name {
        "baseline" | "majority" | "majority_baseline" => Algorithm::MajorityBaseline,
        "nb" | "naive_bayes" => Algorithm::naive_bayes(),
        "lr" | "logreg" | "logistic_regression" => Algorithm::logistic_regression(),
        "knn" => Algorithm::knn(args.k),
        "tree" | "dt" | "decision_tree" => Algorithm::decision_tree(),
        "rf" | "random_forest" => Algorithm::random_forest(args.estimators),
        _ => return None,
    })
}

pub fn mil_spec(args: &ModelArgs, seed: u64) -> Outcome<MilSpec> {
    let unknown = || Failure::Invalid(anyhow!("unknown model `{}`", args.model));
    let instance = |name: &str| {
        instance_algorithm(name, args)
            .map(|a| ClassifierSpec::new(a, seed))
            .ok_or_else(unknown)
    };
    Ok(match args.model.as_str() {
        "citation_knn" | "cknn" => MilSpec::citation_knn(),
        "apr" => MilSpec::apr(),
        "emdd" | "em_dd" => match MilSpec::em_dd(seed) {
            MilSpec::EmDd {
                scale,
                epochs,
                threshold,
                seed,
                ..
            } => MilSpec::EmDd {
                scale,
                epochs,
                threshold,
                max_restarts: args.max_restarts,
                seed,
            },
            other => other,
        },
        other => match other.split_once(':') {
            Some(("mean", inner)) => MilSpec::BagRepresentation {
                aggregation: Aggregation::Mean,
                inner: instance(inner)?,
            },
            Some(("median", inner)) => MilSpec::BagRepresentation {
                aggregation: Aggregation::Median,
                inner: instance(inner)?,
            },
            Some(_) => return Err(unknown()),
            None => MilSpec::mapped(instance(other)?),
        },
    })
}

fn ingest(a: IngestArgs) -> Outcome {
    let loaded = load_log(&a.log)?;
    write(&a.out, &json("dataset", &loaded.dataset)?)?;
    if let Some(path) = a.summary {
        let rows = summarize(&loaded.dataset, &loaded.configs).invalid()?;
        write(&path, &formats::summary_csv(&rows))?;
    }
    log::info!(
        "{} bags, {} submissions",
        loaded.dataset.bags.len(),
        loaded.dataset.instance_count()
    );
    Ok(())
}

fn simulate(a: SimulateArgs) -> Outcome {
    let config = planted_corpus(&a.preset, a.students, a.seed).invalid()?;
    let records = generate(&config).invalid()?;
    write(&a.out, &write_log(&records).internal()?)?;
    let cfg_path = a.config_out.unwrap_or_else(|| a.out.with_extension("cfg"));
    let text: String = config.configs.iter().map(write_config).collect::<Vec<_>>().join("\n");
    write(&cfg_path, &text)
}

fn train(a: TrainArgs) -> Outcome {
    let loaded = load_log(&a.log)?;
    let spec = match mil_spec(&a.model, a.seed)? {
        MilSpec::MilToMl { inner } => inner,
        other => {
            return Err(Failure::Invalid(anyhow!(
                "`{}` is a bag-level learner; the predictor needs an instance model",
                other.name()
            )))
        }
    };
    let (advice, risk_cohort) = match &a.advice {
        Some(p) => parse_advice(&read(p)?)
            .with_context(|| format!("in {}", p.display()))
            .invalid()?,
        None => (AdviceConfig::default(), None),
    };
    let options = TrainOptions {
        normalization: a.normalization.into(),
        background_size: a.background,
        background_seed: a.seed,
        max_leaves: a.leaves,
    };
    let mut predictor = Predictor::train(&loaded.dataset, &spec, &loaded.configs, advice, options).invalid()?;
    if let Some(name) = risk_cohort {
        let cohort = predictor
            .cohorts
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Failure::Invalid(anyhow!("no cohort named `{name}`")))?;
        predictor.advice = predictor.advice.clone().with_risk_group(cohort);
    }
    write(&a.out, &json("predictor", &predictor)?)
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '-' }).collect()
}

fn evaluate(a: EvaluateArgs) -> Outcome {
    let loaded = load_log(&a.log)?;
    let spec = mil_spec(&a.model, a.seed)?;
    let folds = make_folds(&loaded.dataset, a.folds, a.seed).invalid()?;
    let options = CvOptions {
        tie_mode: match a.ties {
            TieArg::Strict => TieMode::Strict,
            TieArg::Half => TieMode::HalfCredit,
        },
        normalization: a.normalization.into(),
    };
    let points = if a.grid { grid_points(&spec) } else { vec![(String::new(), spec)] };
    for (suffix, spec) in points {
        let result = cross_validate(&spec, &loaded.dataset, &folds, options).invalid()?;
        let stem = a.out.join(file_stem(&format!("{}{suffix}", result.model)));
        write(&stem.with_extension("json"), &json("evaluation", &result)?)?;
        write(&stem.with_extension("csv"), &formats::evaluation_csv(&result))?;
        let plot = PlotSpec::BarAuc {
            bars: vec![(result.model.clone(), result.mean_auc)],
            baseline: Some(result.baseline_mean_auc),
        };
        write(&stem.with_extension("svg"), &svg(&plot)?)?;
        log::info!("{}{suffix}: mean AUC {:.4}", result.model, result.mean_auc);
    }
    Ok(())
}

/// Grid points of the instance learner inside `spec`, with a file-name suffix.
fn grid_points(spec: &MilSpec) -> Vec<(String, MilSpec)> {
    let (inner, rebuild): (&ClassifierSpec, Box<dyn Fn(ClassifierSpec) -> MilSpec>) = match spec {
        MilSpec::MilToMl { inner } => (inner, Box::new(MilSpec::mapped)),
        MilSpec::BagRepresentation { aggregation, inner } => {
            let aggregation = *aggregation;
            (
                inner,
                Box::new(move |inner| MilSpec::BagRepresentation { aggregation, inner }),
            )
        }
        _ => return vec![(String::new(), spec.clone())],
    };
    inner
        .grid()
        .into_iter()
        .map(|point| {
            let suffix = match point.algorithm {
                Algorithm::Knn { k } => format!("_k{k}"),
                Algorithm::RandomForest { estimators, .. } => format!("_est{estimators}"),
                _ => String::new(),
            };
            (suffix, rebuild(point))
        })
        .collect()
}

/// Evaluation results in `dir`, by file name.
fn load_results(dir: &Path) -> Outcome<Vec<EvaluationResult>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .invalid()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut results = Vec::new();
    for p in paths {
        match from_json::<EvaluationResult>("evaluation", &read(&p)?) {
            Ok(r) => results.push(r),
            Err(formats::FormatError::Kind { .. }) => log::warn!("skipping {}: not an evaluation", p.display()),
            Err(e) => return Err(Failure::Invalid(anyhow!("{}: {e}", p.display()))),
        }
    }
    Ok(results)
}

fn compare(a: CompareArgs) -> Outcome {
    let results = load_results(&a.results)?;
    if results.len() < 2 {
        return Err(Failure::Invalid(anyhow!(
            "need at least 2 evaluation results in {}, found {}",
            a.results.display(),
            results.len()
        )));
    }
    let matrix = comparison_matrix(&results).invalid()?;
    write(&a.out.join("comparison.json"), &json("comparison", &matrix)?)?;
    write(&a.out.join("comparison.csv"), &formats::comparison_csv(&matrix))?;
    write(&a.out.join("comparison.svg"), &svg(&PlotSpec::ComparisonGrid { matrix })?)?;
    let bars = PlotSpec::BarAuc {
        bars: results.iter().map(|r| (r.model.clone(), r.mean_auc)).collect(),
        baseline: Some(results[0].baseline_mean_auc),
    };
    write(&a.out.join("auc.svg"), &svg(&bars)?)
}

/// Attributions of every instance, in dataset order.
struct Explained {
    keys: Vec<(BagKey, u32)>,
    raw: Vec<Vec<f64>>,
    labels: Vec<bool>,
    attributions: Vec<Attribution>,
}

fn explain_all(predictor: &Predictor, dataset: &Dataset) -> Outcome<Explained> {
    let mut out = Explained {
        keys: Vec::new(),
        raw: Vec::new(),
        labels: Vec::new(),
        attributions: Vec::new(),
    };
    for bag in &dataset.bags {
        for v in &bag.instances {
            let point = predictor.normalization.apply(v).to_vec();
            out.attributions
                .push(explain_model(&predictor.model, &point, &predictor.background).invalid()?);
            out.keys.push((bag.key.clone(), v.submissions_to_date));
            out.raw.push(v.to_point().to_vec());
            out.labels.push(v.success);
        }
    }
    Ok(out)
}

fn explain(a: ExplainArgs) -> Outcome {
    let predictor = load_predictor(&a.model)?;
    let loaded = load_log(&a.log)?;
    let e = explain_all(&predictor, &loaded.dataset)?;
    let importance = global_importance(&e.attributions);
    write(&a.out.join("attributions.csv"), &formats::attributions_csv(&e.keys, &e.attributions))?;
    write(&a.out.join("importance.json"), &json("importance", &importance)?)?;
    write(&a.out.join("importance.csv"), &formats::importance_csv(&importance))?;
    write(
        &a.out.join("importance.svg"),
        &svg(&PlotSpec::ImportanceBar {
            rows: importance.clone(),
        })?,
    )?;
    let features: Vec<String> = if a.feature.is_empty() {
        FEATURE_NAMES.iter().map(|f| f.to_string()).collect()
    } else {
        a.feature.clone()
    };
    for f in features {
        let rows = dependence_export(&f, &e.raw, &e.attributions, &e.labels).invalid()?;
        write(&a.out.join(format!("dependence_{f}.csv")), &formats::dependence_csv(&rows))?;
        let plot = PlotSpec::DependenceScatter { feature: f.clone(), rows };
        write(&a.out.join(format!("dependence_{f}.svg")), &svg(&plot)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CohortRow {
    name: String,
    rule: String,
    predicates: Vec<Predicate>,
    members: usize,
    positives: usize,
    pass_rate: f64,
    p_value: Option<f64>,
    significant: Option<bool>,
    impact: Option<CohortImpact>,
}

fn cohorts(a: CohortArgs) -> Outcome {
    let loaded = load_log(&a.log)?;
    let raw: Vec<Vec<f64>> = loaded.dataset.instances().map(|v| v.to_point().to_vec()).collect();
    let labels: Vec<bool> = loaded.dataset.instances().map(|v| v.success).collect();
    let rules = extract_cohorts(&raw, &labels, a.leaves).invalid()?;
    let significance = if rules.len() >= 2 {
        Some(cohort_significance(&rules, &labels).invalid()?)
    } else {
        log::warn!("a single cohort; no significance test");
        None
    };
    let impacts = match &a.model {
        Some(path) => {
            let predictor = load_predictor(path)?;
            let e = explain_all(&predictor, &loaded.dataset)?;
            Some(cohort_impacts(&rules, &e.attributions).invalid()?)
        }
        None => None,
    };
    let rows: Vec<CohortRow> = rules
        .iter()
        .enumerate()
        .map(|(i, c)| CohortRow {
            name: c.name.clone(),
            rule: c.describe(),
            predicates: c.predicates.clone(),
            members: c.members.len(),
            positives: c.positives,
            pass_rate: c.pass_rate(),
            p_value: significance.as_ref().map(|s| s[i].p_value),
            significant: significance.as_ref().map(|s| s[i].significant),
            impact: impacts.as_ref().map(|im| im[i].clone()),
        })
        .collect();
    write(&a.out.join("cohorts.json"), &json("cohorts", &rows)?)?;
    write(
        &a.out.join("cohorts.csv"),
        &formats::cohorts_csv(&rules, significance.as_deref(), impacts.as_deref()),
    )?;
    if let Some(impacts) = impacts {
        write(&a.out.join("cohorts.svg"), &svg(&PlotSpec::CohortBars { impacts })?)?;
    }
    Ok(())
}

/// Loads one request or an array of them; answers in the same shape.
fn predict(a: PredictArgs) -> Outcome {
    let predictor = load_predictor(&a.model)?;
    let text = read(&a.request)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", a.request.display()))
        .invalid()?;
    let answer = |v: serde_json::Value| -> Outcome<PredictionResponse> {
        let wire: WireRequest = serde_json::from_value(v).context("malformed request").invalid()?;
        let request = wire.to_core().invalid()?;
        service::predict(&predictor, &request).invalid()
    };
    let out = match value {
        serde_json::Value::Array(items) => {
            let responses = items.into_iter().map(answer).collect::<Outcome<Vec<_>>>()?;
            serde_json::to_string_pretty(&responses).internal()?
        }
        single => serde_json::to_string_pretty(&answer(single)?).internal()?,
    };
    write(&a.out, &(out + "\n"))
}

#[derive(Serialize)]
struct StudentFeedback {
    student_id: String,
    assignment: String,
    submissions: usize,
    passed: bool,
    feedback: FeedbackReport,
}

#[derive(Serialize)]
struct Report {
    model_version: String,
    advice: AdviceConfig,
    summary: Vec<SummaryRow>,
    importance: Vec<FeatureImportance>,
    cohorts: Vec<CohortRule>,
    students: Vec<StudentFeedback>,
}

fn markdown(r: &Report) -> String {
    let mut md = String::new();
    md.push_str("# Student risk report\n\n");
    md.push_str(&format!("Model: `{}`\n\n## Summary\n\n", r.model_version));
    md.push_str("| Year | Assignment | Students | Passed | Failed | Attempts | Avg. submissions (pass) | Avg. submissions (fail) | Attempts until success |\n");
    md.push_str("|---|---|---|---|---|---|---|---|---|\n");
    let f2 = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    for s in &r.summary {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            s.year,
            s.assignment,
            s.students_total,
            s.students_success,
            s.students_failure,
            s.attempts_total,
            f2(s.avg_submissions_success),
            f2(s.avg_submissions_failure),
            f2(s.attempts_until_success)
        ));
    }
    md.push_str("\n## Feature importance\n\n| Feature | Mean abs. Shapley |\n|---|---|\n");
    for i in &r.importance {
        md.push_str(&format!("| {} | {:.4} |\n", i.feature, i.mean_abs_phi));
    }
    md.push_str("\n## Cohorts\n\n| Cohort | Rule |\n|---|---|\n");
    for c in &r.cohorts {
        md.push_str(&format!("| {} | {} |\n", c.name, c.describe()));
    }
    md.push_str("\n## Students at risk\n\n| Student | Assignment | Success probability | Advice |\n|---|---|---|---|\n");
    let mut at_risk: Vec<&StudentFeedback> = r.students.iter().filter(|s| s.feedback.success_probability < 0.5).collect();
    at_risk.sort_by(|a, b| {
        a.feedback
            .success_probability
            .total_cmp(&b.feedback.success_probability)
            .then_with(|| a.student_id.cmp(&b.student_id))
    });
    for s in at_risk {
        let advice: Vec<&str> = s.feedback.advice.iter().map(|a| a.id.as_str()).collect();
        md.push_str(&format!(
            "| {} | {} | {:.2} | {} |\n",
            s.student_id,
            s.assignment,
            s.feedback.success_probability,
            advice.join(", ")
        ));
    }
    md
}

fn report(a: ReportArgs) -> Outcome {
    let predictor = load_predictor(&a.model)?;
    let loaded = load_log(&a.log)?;
    let summary = summarize(&loaded.dataset, &loaded.configs).invalid()?;
    let e = explain_all(&predictor, &loaded.dataset)?;
    let students = loaded
        .dataset
        .bags
        .iter()
        .map(|b| {
            Ok(StudentFeedback {
                student_id: b.key.student_id.clone(),
                assignment: b.key.assignment.to_string(),
                submissions: b.instances.len(),
                passed: b.label,
                feedback: predictor.feedback(&b.instances).invalid()?,
            })
        })
        .collect::<Outcome<Vec<_>>>()?;
    let report = Report {
        model_version: predictor.model_version.clone(),
        advice: predictor.advice.clone(),
        summary,
        importance: global_importance(&e.attributions),
        cohorts: predictor.cohorts.clone(),
        students,
    };
    write(&a.out.join("summary.csv"), &formats::summary_csv(&report.summary))?;
    write(&a.out.join("report.json"), &json("report", &report)?)?;
    write(&a.out.join("report.md"), &markdown(&report))
}

fn serve(a: ServeArgs) -> Outcome {
    let state = match &a.model {
        Some(path) => AppState::new(load_predictor(path)?, a.sessions),
        None => {
            log::warn!("no model given; predictions answer 503");
            AppState::default()
        }
    };
    let runtime = tokio::runtime::Runtime::new().internal()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&a.addr)
            .await
            .with_context(|| format!("binding {}", a.addr))
            .invalid()?;
        log::info!("listening on {}", a.addr);
        service::serve(listener, Arc::new(state)).await.internal()
    })
}

pub fn execute(cli: Cli) -> Outcome {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Simulate(a) => simulate(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Compare(a) => compare(a),
        Command::Explain(a) => explain(a),
        Command::Cohorts(a) => cohorts(a),
        Command::Predict(a) => predict(a),
        Command::Report(a) => report(a),
        Command::Serve(a) => serve(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Usage errors go to stderr with status 1.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => {
            let (Failure::Invalid(e) | Failure::Internal(e)) = &f;
            eprintln!("error: {e:#}");
            f.exit_code()
        }
    }
}
