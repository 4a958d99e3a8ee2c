//! Seeded synthetic submission logs with planted pass/fail rules.
//!
//! Each student is drawn from a weighted archetype that fixes how early they
//! start, how often they submit per day and how many submissions they make in
//! total. Whether they pass is decided by the archetype's threshold rule on the
//! behaviour actually generated, so the pattern a model should recover is known.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::{AssignmentConfig, AssignmentId, SubmissionRecord, Timestamp, Verdict, SECONDS_PER_DAY};
use crate::{Error, Result};

/// Version tag of the built-in presets; bump when their parameters change.
pub const PRESET_VERSION: u32 = 1;

pub const PRESET_NAMES: [&str; 3] = ["deadline_rushers", "persistence_pays", "mixed"];

/// Give up rejection sampling after this many draws and clamp instead.
const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
    Poisson { mean: f64 },
}

impl Distribution {
    fn check(&self, what: &str) -> core::result::Result<(), String> {
        let ok = match *self {
            Distribution::Constant { value } => value.is_finite(),
            Distribution::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            Distribution::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Distribution::Poisson { mean } => mean.is_finite() && mean > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{what}: invalid distribution parameters {self:?}"))
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Constant { value } => value,
            Distribution::Uniform { low, high } => rng.random_range(low..high),
            Distribution::Normal { mean, sd } => Normal::new(mean, sd).expect("checked").sample(rng),
            Distribution::Poisson { mean } => Poisson::new(mean).expect("checked").sample(rng),
        }
    }

    /// Draws until the value lies in `[low, high]`, clamping as a last resort.
    fn draw_within<R: Rng + ?Sized>(&self, rng: &mut R, low: f64, high: f64) -> f64 {
        for _ in 0..MAX_REJECTIONS {
            let v = self.draw(rng);
            if v >= low && v <= high {
                return v;
            }
        }
        self.draw(rng).clamp(low, high)
    }

    /// Smallest and largest value the distribution can produce.
    fn support(&self) -> (f64, f64) {
        match *self {
            Distribution::Constant { value } => (value, value),
            Distribution::Uniform { low, high } => (low, high),
            Distribution::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Distribution::Poisson { .. } => (0.0, f64::INFINITY),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Constant { value } => value,
            Distribution::Uniform { low, high } => (low + high) / 2.0,
            Distribution::Normal { mean, .. } | Distribution::Poisson { mean } => mean,
        }
    }
}

/// Behaviour the pass rule keys on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "threshold", rename_all = "snake_case")]
pub enum PassCondition {
    /// First submission strictly less than this many days before the deadline.
    FirstOffsetBelow(f64),
    /// Strictly more total submissions than this.
    TotalSubmissionsAbove(u32),
}

impl PassCondition {
    pub fn holds(&self, first_offset_days: f64, total_submissions: u32) -> bool {
        match *self {
            PassCondition::FirstOffsetBelow(days) => first_offset_days < days,
            PassCondition::TotalSubmissionsAbove(n) => total_submissions > n,
        }
    }
}

/// Pass with probability `p_hi` when the condition holds, else `p_lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassRule {
    pub condition: PassCondition,
    pub p_hi: f64,
    pub p_lo: f64,
}

impl PassRule {
    /// Passes with the same probability regardless of behaviour.
    pub fn constant(p: f64) -> Self {
        PassRule {
            condition: PassCondition::TotalSubmissionsAbove(0),
            p_hi: p,
            p_lo: p,
        }
    }

    pub fn probability(&self, first_offset_days: f64, total_submissions: u32) -> f64 {
        if self.condition.holds(first_offset_days, total_submissions) {
            self.p_hi
        } else {
            self.p_lo
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeSpec {
    pub name: String,
    /// Days before the deadline of the first submission.
    pub first_submission_offset: Distribution,
    /// Mean submissions per active day after the first one.
    pub daily_submission_rate: Distribution,
    pub total_submissions: Distribution,
    pub pass_rule: PassRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedArchetype {
    pub weight: f64,
    pub archetype: ArchetypeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Preset name and version, or a free-form label.
    pub label: String,
    pub seed: u64,
    pub students: usize,
    pub archetypes: Vec<WeightedArchetype>,
    pub configs: Vec<AssignmentConfig>,
    /// Chance that a passing student keeps submitting after their success.
    #[serde(default)]
    pub post_success_probability: f64,
}

fn infeasible(name: &str, reason: String) -> Error {
    Error::InfeasibleArchetype {
        name: name.to_string(),
        reason,
    }
}

fn check_probability(name: &str, what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(infeasible(name, format!("{what} = {p} is not a probability")))
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.archetypes.is_empty() {
            return Err(Error::InvalidConfig("no archetypes".into()));
        }
        if self.configs.is_empty() {
            return Err(Error::InvalidConfig("no assignment configs".into()));
        }
        let total: f64 = self.archetypes.iter().map(|a| a.weight).sum();
        if self.archetypes.iter().any(|a| !(a.weight >= 0.0)) || libm::fabs(total - 1.0) > 1e-9 {
            return Err(Error::InvalidConfig(format!("archetype weights sum to {total}, expected 1")));
        }
        if !(0.0..=1.0).contains(&self.post_success_probability) {
            return Err(Error::InvalidConfig("post_success_probability must lie in [0, 1]".into()));
        }
        for c in &self.configs {
            c.validate()?;
        }
        for WeightedArchetype { archetype: a, .. } in &self.archetypes {
            let name = a.name.as_str();
            for (what, d) in [
                ("first_submission_offset", a.first_submission_offset),
                ("daily_submission_rate", a.daily_submission_rate),
                ("total_submissions", a.total_submissions),
            ] {
                d.check(what).map_err(|r| infeasible(name, r))?;
            }
            check_probability(name, "p_hi", a.pass_rule.p_hi)?;
            check_probability(name, "p_lo", a.pass_rule.p_lo)?;
            if a.daily_submission_rate.support().1 <= 0.0 {
                return Err(infeasible(name, "daily submission rate is never positive".into()));
            }
            if a.total_submissions.support().1 < 1.0 {
                return Err(infeasible(name, "total submissions can never reach 1".into()));
            }
            let (lo, hi) = a.first_submission_offset.support();
            let mean = a.first_submission_offset.mean();
            for c in &self.configs {
                let window = c.window_days();
                let bounded_out = hi.is_finite() && (hi > window || lo < 0.0);
                let centred_out = !hi.is_finite() && !(0.0..=window).contains(&mean);
                if bounded_out || centred_out {
                    return Err(infeasible(
                        name,
                        format!(
                            "first submission offset {lo}..{hi} days does not fit the {window}-day window of {}",
                            c.assignment
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Generated behaviour of one student on one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentTrace {
    pub student_id: String,
    pub archetype: usize,
    pub assignment: AssignmentId,
    pub first_offset_days: f64,
    pub total_submissions: u32,
    pub passed: bool,
}

/// Records in `(student, assignment, time)` order, deterministic in the seed.
pub fn generate(config: &GeneratorConfig) -> Result<Vec<SubmissionRecord>> {
    Ok(generate_with_traces(config)?.0)
}

/// Like [`generate`], also returning the behaviour drawn for every bag.
pub fn generate_with_traces(config: &GeneratorConfig) -> Result<(Vec<SubmissionRecord>, Vec<StudentTrace>)> {
    config.validate()?;
    let picker = WeightedIndex::new(config.archetypes.iter().map(|a| a.weight))
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let width = config.students.to_string().len().max(4);
    let mut configs = config.configs.clone();
    configs.sort_by_key(|c| c.assignment);

    let mut root = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::new();
    let mut traces = Vec::new();
    for i in 0..config.students {
        let mut rng = ChaCha8Rng::seed_from_u64(root.next_u64());
        let student_id = format!("s{:0width$}", i + 1);
        let index = picker.sample(&mut rng);
        let archetype = &config.archetypes[index].archetype;
        for c in &configs {
            let trace = simulate_student(&mut rng, archetype, c, config.post_success_probability, &student_id, &mut records);
            traces.push(StudentTrace { archetype: index, ..trace });
        }
    }
    Ok((records, traces))
}

fn simulate_student<R: Rng>(
    rng: &mut R,
    archetype: &ArchetypeSpec,
    config: &AssignmentConfig,
    post_success_probability: f64,
    student_id: &str,
    out: &mut Vec<SubmissionRecord>,
) -> StudentTrace {
    let window = config.window_days();
    let offset = archetype.first_submission_offset.draw_within(rng, 0.0, window);
    let rate = archetype.daily_submission_rate.draw_within(rng, f64::MIN_POSITIVE, f64::MAX);
    let total = libm::round(archetype.total_submissions.draw_within(rng, 0.5, f64::from(u32::MAX))) as u32;
    let total = total.max(1);

    let deadline = config.deadline.seconds();
    let first = (deadline - libm::round(offset * SECONDS_PER_DAY as f64) as i64).max(config.open_date.seconds());
    let times = submission_times(rng, first, deadline, rate, total);
    let first_offset_days = Timestamp(first).days_until(config.deadline);

    let passed = rng.random_bool(archetype.pass_rule.probability(first_offset_days, total));
    let success_at = if passed {
        if rng.random_bool(post_success_probability) {
            rng.random_range(0..total as usize)
        } else {
            total as usize - 1
        }
    } else {
        usize::MAX
    };
    for (k, &t) in times.iter().enumerate() {
        let verdict = if k == success_at {
            Verdict::Success
        } else if k > success_at {
            Verdict::ALL[rng.random_range(0..Verdict::ALL.len())]
        } else {
            Verdict::FAILURES[rng.random_range(0..Verdict::FAILURES.len())]
        };
        out.push(SubmissionRecord {
            student_id: student_id.to_string(),
            assignment: config.assignment,
            submitted_at: Timestamp(t),
            verdict,
            passed_assignment: passed,
        });
    }
    StudentTrace {
        student_id: student_id.to_string(),
        archetype: 0,
        assignment: config.assignment,
        first_offset_days,
        total_submissions: total,
        passed,
    }
}

/// First submission at `first`, then day by day a Poisson(`rate`) number of
/// submissions jittered uniformly within the day, until `total` are placed.
/// Any left over at the deadline land uniformly in `[first, deadline]`.
fn submission_times<R: Rng>(rng: &mut R, first: i64, deadline: i64, rate: f64, total: u32) -> Vec<i64> {
    let per_day = Poisson::new(rate).expect("rate checked positive");
    let mut times = alloc::vec![first];
    let mut remaining = total as usize - 1;
    let mut day = first.div_euclid(SECONDS_PER_DAY);
    while remaining > 0 && day * SECONDS_PER_DAY <= deadline {
        let lo = (day * SECONDS_PER_DAY).max(first);
        let hi = (day * SECONDS_PER_DAY + SECONDS_PER_DAY - 1).min(deadline);
        let n = (per_day.sample(rng) as usize).min(remaining);
        let mut today: Vec<i64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
        today.sort_unstable();
        times.extend(today);
        remaining -= n;
        day += 1;
    }
    if remaining > 0 {
        let mut rest: Vec<i64> = (0..remaining).map(|_| rng.random_range(first..=deadline)).collect();
        times.append(&mut rest);
        times[1..].sort_unstable();
    }
    times
}

/// Deadline 2020-03-21T00:00:00Z with a 20-day window.
pub fn preset_assignment() -> AssignmentConfig {
    let deadline = Timestamp(1_584_748_800);
    let open = Timestamp(deadline.seconds() - 20 * SECONDS_PER_DAY);
    AssignmentConfig::new(AssignmentId::A1, open, deadline, "2019-20").expect("valid preset window")
}

fn rusher_rule() -> PassRule {
    PassRule {
        condition: PassCondition::FirstOffsetBelow(1.0),
        p_hi: 0.1,
        p_lo: 0.95,
    }
}

fn persistence_rule() -> PassRule {
    PassRule {
        condition: PassCondition::TotalSubmissionsAbove(40),
        p_hi: 0.9,
        p_lo: 0.15,
    }
}

fn archetype(name: &str, offset: Distribution, rate: f64, total: f64, pass_rule: PassRule) -> ArchetypeSpec {
    ArchetypeSpec {
        name: name.to_string(),
        first_submission_offset: offset,
        daily_submission_rate: Distribution::Constant { value: rate },
        total_submissions: Distribution::Poisson { mean: total },
        pass_rule,
    }
}

/// Built-in corpora with a known pass/fail rule.
///
/// - `deadline_rushers`: starting less than one day before the deadline fails
///   with probability 0.9; starting earlier passes with probability 0.95.
/// - `persistence_pays`: more than 40 submissions passes with probability 0.9,
///   otherwise 0.15.
/// - `mixed`: one archetype of each rule, weighted 0.5/0.5.
pub fn planted_corpus(name: &str, students: usize, seed: u64) -> Result<GeneratorConfig> {
    let archetypes = match name {
        "deadline_rushers" => alloc::vec![
            WeightedArchetype {
                weight: 0.5,
                archetype: archetype("rusher", Distribution::Uniform { low: 0.05, high: 0.95 }, 6.0, 8.0, rusher_rule()),
            },
            WeightedArchetype {
                weight: 0.5,
                archetype: archetype("planner", Distribution::Uniform { low: 1.5, high: 14.0 }, 2.0, 15.0, rusher_rule()),
            },
        ],
        "persistence_pays" => alloc::vec![
            WeightedArchetype {
                weight: 0.5,
                archetype: archetype("grinder", Distribution::Uniform { low: 2.0, high: 14.0 }, 5.0, 55.0, persistence_rule()),
            },
            WeightedArchetype {
                weight: 0.5,
                archetype: archetype("quitter", Distribution::Uniform { low: 2.0, high: 14.0 }, 2.0, 20.0, persistence_rule()),
            },
        ],
        "mixed" => alloc::vec![
            WeightedArchetype {
                weight: 0.5,
                archetype: archetype("rusher", Distribution::Uniform { low: 0.05, high: 3.0 }, 4.0, 10.0, rusher_rule()),
            },
            WeightedArchetype {
                weight: 0.5,
                archetype: archetype("persister", Distribution::Uniform { low: 2.0, high: 14.0 }, 4.0, 40.0, persistence_rule()),
            },
        ],
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(GeneratorConfig {
        label: format!("{name}@{PRESET_VERSION}"),
        seed,
        students,
        archetypes,
        configs: alloc::vec![preset_assignment()],
        post_success_probability: 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract_features;
    use alloc::vec;

    fn one_archetype(rule: PassRule, offset: Distribution) -> GeneratorConfig {
        GeneratorConfig {
            label: "test".into(),
            seed: 1,
            students: 10,
            archetypes: vec![WeightedArchetype {
                weight: 1.0,
                archetype: archetype("only", offset, 3.0, 6.0, rule),
            }],
            configs: vec![preset_assignment()],
            post_success_probability: 0.0,
        }
    }

    #[test]
    fn same_seed_same_log() {
        let c = planted_corpus("mixed", 50, 9).unwrap();
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let other = GeneratorConfig { seed: 10, ..c.clone() };
        assert_ne!(generate(&c).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn certain_pass_gives_all_positive_bags() {
        let c = one_archetype(PassRule::constant(1.0), Distribution::Uniform { low: 0.5, high: 5.0 });
        let (records, traces) = generate_with_traces(&c).unwrap();
        assert_eq!(traces.len(), 10);
        assert!(traces.iter().all(|t| t.passed));
        assert!(records.iter().all(|r| r.passed_assignment));
    }

    #[test]
    fn exactly_passers_end_with_success() {
        let mut c = planted_corpus("mixed", 80, 3).unwrap();
        c.post_success_probability = 0.0;
        let records = generate(&c).unwrap();
        let feats = extract_features(&records, &c.configs).unwrap();
        let mut i = 0;
        while i < records.len() {
            let key = records[i].key();
            let group: Vec<&SubmissionRecord> = records[i..].iter().take_while(|r| r.key() == key).collect();
            let successes = group.iter().filter(|r| r.verdict == Verdict::Success).count();
            if group[0].passed_assignment {
                assert_eq!(successes, 1);
                assert_eq!(group.last().unwrap().verdict, Verdict::Success);
            } else {
                assert_eq!(successes, 0);
            }
            i += group.len();
        }
        assert_eq!(feats.len(), records.len());
    }

    #[test]
    fn rushers_fail_at_the_planted_rate() {
        let c = planted_corpus("deadline_rushers", 200, 42).unwrap();
        let (_, traces) = generate_with_traces(&c).unwrap();
        let rushers: Vec<&StudentTrace> = traces.iter().filter(|t| t.first_offset_days < 1.0).collect();
        let failed = rushers.iter().filter(|t| !t.passed).count() as f64 / rushers.len() as f64;
        assert!(libm::fabs(failed - 0.9) <= 0.07, "failure rate {failed} over {}", rushers.len());
    }

    #[test]
    fn records_are_valid_and_canonical() {
        for seed in 0..100 {
            let c = planted_corpus(PRESET_NAMES[seed as usize % 3], 20, seed).unwrap();
            let records = generate(&c).unwrap();
            let deadline = c.configs[0].deadline;
            let open = c.configs[0].open_date;
            for w in records.windows(2) {
                let a = (&w[0].student_id, w[0].assignment, w[0].submitted_at);
                let b = (&w[1].student_id, w[1].assignment, w[1].submitted_at);
                assert!(a <= b);
            }
            assert!(records.iter().all(|r| r.submitted_at <= deadline && r.submitted_at >= open));
        }
    }

    /// Largest gap between the empirical CDF of `xs` and `cdf`.
    fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn first_offsets_follow_the_archetype() {
        let mut c = one_archetype(PassRule::constant(0.5), Distribution::Uniform { low: 1.0, high: 9.0 });
        c.students = 1000;
        let (_, traces) = generate_with_traces(&c).unwrap();
        let offsets: Vec<f64> = traces.iter().map(|t| t.first_offset_days).collect();
        let d = ks_distance(offsets, |x| ((x - 1.0) / 8.0).clamp(0.0, 1.0));
        assert!(d < 0.1, "KS {d}");

        c.archetypes[0].archetype.first_submission_offset = Distribution::Normal { mean: 7.0, sd: 2.0 };
        let (_, traces) = generate_with_traces(&c).unwrap();
        let offsets: Vec<f64> = traces.iter().map(|t| t.first_offset_days).collect();
        let d = ks_distance(offsets, |x| 0.5 * libm::erfc(-(x - 7.0) / (2.0 * core::f64::consts::SQRT_2)));
        assert!(d < 0.1, "KS {d}");
    }

    #[test]
    fn totals_follow_the_archetype() {
        let mut c = one_archetype(PassRule::constant(0.5), Distribution::Uniform { low: 1.0, high: 9.0 });
        c.students = 1000;
        let (_, traces) = generate_with_traces(&c).unwrap();
        let totals: Vec<f64> = traces.iter().map(|t| f64::from(t.total_submissions)).collect();
        // Poisson(6) conditioned on a draw ≥ 0.5, i.e. ≥ 1.
        let pmf = |k: u32| libm::exp(-6.0 + f64::from(k) * libm::log(6.0) - libm::lgamma(f64::from(k) + 1.0));
        let p0 = pmf(0);
        let cdf = |x: f64| {
            let upto = libm::floor(x) as u32;
            (1..=upto).map(pmf).sum::<f64>() / (1.0 - p0)
        };
        let n = totals.len() as f64;
        let d = (1..=60)
            .map(|k| {
                let empirical = totals.iter().filter(|&&t| t <= f64::from(k)).count() as f64 / n;
                (empirical - cdf(f64::from(k))).abs()
            })
            .fold(0.0, f64::max);
        assert!(d < 0.1, "KS {d}");
    }

    #[test]
    fn offsets_outside_the_window_are_rejected() {
        let c = one_archetype(PassRule::constant(0.5), Distribution::Uniform { low: 1.0, high: 30.0 });
        assert!(matches!(generate(&c), Err(Error::InfeasibleArchetype { .. })));
        let c = one_archetype(PassRule::constant(1.5), Distribution::Uniform { low: 1.0, high: 3.0 });
        assert!(matches!(generate(&c), Err(Error::InfeasibleArchetype { .. })));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut c = planted_corpus("mixed", 5, 0).unwrap();
        c.archetypes[0].weight = 0.4;
        assert!(matches!(generate(&c), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn presets() {
        let r = planted_corpus("deadline_rushers", 1, 0).unwrap();
        assert!(r
            .archetypes
            .iter()
            .all(|a| a.archetype.pass_rule.condition == PassCondition::FirstOffsetBelow(1.0)));
        let p = planted_corpus("persistence_pays", 1, 0).unwrap();
        assert!(p
            .archetypes
            .iter()
            .all(|a| a.archetype.pass_rule.condition == PassCondition::TotalSubmissionsAbove(40)));
        let m = planted_corpus("mixed", 1, 0).unwrap();
        assert_eq!(m.archetypes.iter().map(|a| a.weight).collect::<Vec<_>>(), vec![0.5, 0.5]);
        assert_eq!(planted_corpus("nope", 1, 0).unwrap_err(), Error::UnknownPreset("nope".into()));
    }
}
