//! The meta-metrics engine.
//!
//! Every function here reads the prefix `1..=n` of an [`ArtifactHistory`].
//! Quality gates are cumulative prefixes: a pair `(n1, n2)` compares the
//! history from the first revision up to `n1` with the history up to `n2`.
//!
//! | metric | meaning | sign reading |
//! |---|---|---|
//! | `q1` | `R+(n2) - R+(n1)`, change of the success ratio | `>= 0`: not decreased |
//! | `q2` | `age-(n2) - age-(n1)`, change of the age of the last failure | `>= 0`: not decreased |
//! | `q3` | `R_succeeded / R_failures`, mean time between test failures | larger is better |
//! | `q4` | mean of `f/sloc` up to `n1` minus the same up to `n2` | `>= 0`: improved |
//! | `q5` | mean passing duration up to `n1` minus the same up to `n2` | `>= 0`: improved |
//! | `q6` | `v(n1, s) - v(n2, s)`, change of acting time spread | `< 0`: decreased |
//!
//! Undefined values (no failure episode for `q3`, no passing revision for
//! `q5`/`q6`, missing measurements) are errors, never NaN or infinity.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::history::{ArtifactHistory, ArtifactId, HistorySet, IndicatorSample, TestOutcome};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricsError {
    #[error("gate {n} out of range 1..={len}")]
    OutOfRange { n: usize, len: usize },

    #[error("invalid gate order ({n1}, {n2})")]
    InvalidGateOrder { n1: usize, n2: usize },

    #[error("no gates given")]
    NoGates,

    #[error("MTBTF undefined: no fail-to-pass transition")]
    UndefinedMtbtf,

    #[error("no successful revision in 1..={n}")]
    NoSuccessfulRevisions { n: usize },

    #[error("{indicator} missing at revisions {}", spans(.revisions))]
    MissingIndicator {
        indicator: String,
        revisions: Vec<usize>,
    },

    #[error("acting time for situation {situation:?} missing at revisions {}", spans(.revisions))]
    MissingSituation {
        situation: String,
        revisions: Vec<usize>,
    },
}

/// `[1, 2, 3, 7]` as `1-3, 7`.
fn spans(revisions: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < revisions.len() {
        let mut j = i;
        while j + 1 < revisions.len() && revisions[j + 1] == revisions[j] + 1 {
            j += 1;
        }
        parts.push(if i == j {
            revisions[i].to_string()
        } else {
            format!("{}-{}", revisions[i], revisions[j])
        });
        i = j + 1;
    }
    parts.join(", ")
}

/// Code indicators that are normalized by source lines of code in `q4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    MisraWarnings,
    Mccabe,
    Uncovered,
}

impl Indicator {
    pub const ALL: [Indicator; 3] = [
        Indicator::MisraWarnings,
        Indicator::Mccabe,
        Indicator::Uncovered,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::MisraWarnings => "misra_warnings",
            Indicator::Mccabe => "mccabe",
            Indicator::Uncovered => "uncovered",
        }
    }

    pub fn value(self, sample: &IndicatorSample) -> Option<u64> {
        match self {
            Indicator::MisraWarnings => sample.misra_warnings,
            Indicator::Mccabe => sample.mccabe,
            Indicator::Uncovered => sample.uncovered,
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| format!("unknown indicator {s:?} (expected misra_warnings, mccabe or uncovered)"))
    }
}

/// How the squared deviations of acting time points are summed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadMode {
    /// Deviations of passing revisions only.
    #[default]
    PassesOnly,
    /// Every revision of the prefix, with failing revisions contributing an
    /// acting time of 0 (the formula taken verbatim).
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Improved,
    NotDecreased,
    Decreased,
    Undefined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Improved => "improved",
            Verdict::NotDecreased => "not decreased",
            Verdict::Decreased => "decreased",
            Verdict::Undefined => "undefined",
        })
    }
}

/// Gate-pair metrics that carry a sign reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMetric {
    Q1,
    Q2,
    Q4,
    Q5,
    Q6,
}

// (metric, verdict for value >= 0, verdict for value < 0)
const VERDICT_TABLE: [(PairMetric, Verdict, Verdict); 5] = [
    (PairMetric::Q1, Verdict::NotDecreased, Verdict::Decreased),
    (PairMetric::Q2, Verdict::NotDecreased, Verdict::Decreased),
    (PairMetric::Q4, Verdict::Improved, Verdict::Decreased),
    (PairMetric::Q5, Verdict::Improved, Verdict::Decreased),
    (PairMetric::Q6, Verdict::NotDecreased, Verdict::Decreased),
];

/// Sign reading of a metric value. Exact comparison against zero.
pub fn verdict(metric: PairMetric, value: f64) -> Verdict {
    let (_, non_negative, negative) = VERDICT_TABLE
        .iter()
        .find(|(m, _, _)| *m == metric)
        .expect("every pair metric has a table row");
    if value >= 0.0 {
        *non_negative
    } else {
        *negative
    }
}

fn check_n(h: &ArtifactHistory, n: usize) -> Result<(), MetricsError> {
    if n == 0 || n > h.len() {
        return Err(MetricsError::OutOfRange { n, len: h.len() });
    }
    Ok(())
}

fn check_pair(h: &ArtifactHistory, n1: usize, n2: usize, strict: bool) -> Result<(), MetricsError> {
    check_n(h, n1)?;
    check_n(h, n2)?;
    if n1 > n2 || (strict && n1 == n2) {
        return Err(MetricsError::InvalidGateOrder { n1, n2 });
    }
    Ok(())
}

fn passes(h: &ArtifactHistory, n: usize) -> impl Iterator<Item = &crate::history::RevisionRecord> {
    h.records()[..n].iter().filter(|r| r.outcome.is_pass())
}

/// Number of passing revisions in `1..=n`.
pub fn r_succeeded(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    check_n(h, n)?;
    Ok(passes(h, n).count())
}

pub fn r_failed(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    Ok(n - r_succeeded(h, n)?)
}

/// `(R+, R-)`: the share of passing and failing revisions in `1..=n`.
pub fn success_ratio(h: &ArtifactHistory, n: usize) -> Result<(f64, f64), MetricsError> {
    let plus = r_succeeded(h, n)? as f64 / n as f64;
    Ok((plus, 1.0 - plus))
}

pub fn q1(h: &ArtifactHistory, n1: usize, n2: usize) -> Result<f64, MetricsError> {
    check_pair(h, n1, n2, false)?;
    Ok(success_ratio(h, n2)?.0 - success_ratio(h, n1)?.0)
}

/// Last failing revision in `1..=n`, or 0 if the prefix never failed.
pub fn last_failed(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    check_n(h, n)?;
    Ok(h.records()[..n]
        .iter()
        .rposition(|r| r.outcome == TestOutcome::Fail)
        .map_or(0, |k| k + 1))
}

/// Revisions passed since the last failure (`n` when never failed).
pub fn neg_age(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    Ok(n - last_failed(h, n)?)
}

/// Requires `n1 < n2`.
pub fn q2(h: &ArtifactHistory, n1: usize, n2: usize) -> Result<i64, MetricsError> {
    check_pair(h, n1, n2, true)?;
    Ok(neg_age(h, n2)? as i64 - neg_age(h, n1)? as i64)
}

/// Number of failure episodes closed by a pass: fail-to-pass transitions
/// `i -> i+1` with `i + 1 <= n`. A failure streak still open at `n` is not
/// counted.
pub fn r_failures(h: &ArtifactHistory, n: usize) -> Result<usize, MetricsError> {
    check_n(h, n)?;
    Ok(h.records()[..n]
        .windows(2)
        .filter(|w| w[0].outcome == TestOutcome::Fail && w[1].outcome == TestOutcome::Pass)
        .count())
}

/// Mean time between test failures, `R_succeeded / R_failures`.
pub fn q3_mtbtf(h: &ArtifactHistory, n: usize) -> Result<f64, MetricsError> {
    let failures = r_failures(h, n)?;
    if failures == 0 {
        return Err(MetricsError::UndefinedMtbtf);
    }
    Ok(r_succeeded(h, n)? as f64 / failures as f64)
}

pub fn q4(
    h: &ArtifactHistory,
    n1: usize,
    n2: usize,
    indicator: Indicator,
) -> Result<f64, MetricsError> {
    check_pair(h, n1, n2, false)?;
    let records = &h.records()[..n2];
    let missing = |get: &dyn Fn(&IndicatorSample) -> Option<u64>| -> Vec<usize> {
        records
            .iter()
            .filter(|r| get(&r.indicators).is_none())
            .map(|r| r.revision)
            .collect()
    };
    let lacking = missing(&|s| indicator.value(s));
    if !lacking.is_empty() {
        return Err(MetricsError::MissingIndicator {
            indicator: indicator.as_str().to_string(),
            revisions: lacking,
        });
    }
    let lacking = missing(&|s| s.sloc);
    if !lacking.is_empty() {
        return Err(MetricsError::MissingIndicator {
            indicator: "sloc".to_string(),
            revisions: lacking,
        });
    }
    // running sums of f/sloc; cumulative[k] covers revisions 1..=k
    let cumulative: Vec<f64> = records
        .iter()
        .scan(0.0, |acc, r| {
            let f = indicator.value(&r.indicators).unwrap_or_default() as f64;
            let sloc = r.indicators.sloc.unwrap_or(1) as f64;
            *acc += f / sloc;
            Some(*acc)
        })
        .collect();
    Ok(cumulative[n1 - 1] / n1 as f64 - cumulative[n2 - 1] / n2 as f64)
}

pub fn q5(h: &ArtifactHistory, n1: usize, n2: usize) -> Result<f64, MetricsError> {
    check_pair(h, n1, n2, false)?;
    if passes(h, n1).next().is_none() {
        return Err(MetricsError::NoSuccessfulRevisions { n: n1 });
    }
    let lacking: Vec<usize> = passes(h, n2)
        .filter(|r| r.indicators.duration.is_none())
        .map(|r| r.revision)
        .collect();
    if !lacking.is_empty() {
        return Err(MetricsError::MissingIndicator {
            indicator: "duration".to_string(),
            revisions: lacking,
        });
    }
    let mean = |n: usize| {
        let (sum, count) = passes(h, n).fold((0.0, 0usize), |(s, c), r| {
            (s + r.indicators.duration.unwrap_or_default(), c + 1)
        });
        sum / count as f64
    };
    Ok(mean(n1) - mean(n2))
}

/// Mean and population standard deviation of acting time points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActingSpread {
    pub mean: f64,
    pub v: f64,
}

fn missing_situation(h: &ArtifactHistory, n: usize, situation: &str) -> Result<(), MetricsError> {
    let lacking: Vec<usize> = passes(h, n)
        .filter(|r| !r.indicators.acting.contains_key(situation))
        .map(|r| r.revision)
        .collect();
    if lacking.is_empty() {
        Ok(())
    } else {
        Err(MetricsError::MissingSituation {
            situation: situation.to_string(),
            revisions: lacking,
        })
    }
}

fn spread_unchecked(h: &ArtifactHistory, n: usize, situation: &str, mode: SpreadMode) -> ActingSpread {
    // Welford's update over the passing revisions
    let (count, mean, m2) = passes(h, n)
        .map(|r| r.indicators.acting[situation])
        .fold((0usize, 0.0f64, 0.0f64), |(k, mean, m2), x| {
            let k = k + 1;
            let delta = x - mean;
            let mean = mean + delta / k as f64;
            (k, mean, m2 + delta * (x - mean))
        });
    let squares = match mode {
        SpreadMode::PassesOnly => m2,
        // each failing revision adds (0 - mean)^2
        SpreadMode::Strict => m2 + (n - count) as f64 * mean * mean,
    };
    ActingSpread {
        mean,
        v: (squares / count as f64).sqrt(),
    }
}

pub fn acting_stddev(
    h: &ArtifactHistory,
    n: usize,
    situation: &str,
    mode: SpreadMode,
) -> Result<ActingSpread, MetricsError> {
    check_n(h, n)?;
    if passes(h, n).next().is_none() {
        return Err(MetricsError::NoSuccessfulRevisions { n });
    }
    missing_situation(h, n, situation)?;
    Ok(spread_unchecked(h, n, situation, mode))
}

pub fn q6(
    h: &ArtifactHistory,
    n1: usize,
    n2: usize,
    situation: &str,
    mode: SpreadMode,
) -> Result<f64, MetricsError> {
    check_pair(h, n1, n2, false)?;
    if passes(h, n1).next().is_none() {
        return Err(MetricsError::NoSuccessfulRevisions { n: n1 });
    }
    missing_situation(h, n2, situation)?;
    Ok(spread_unchecked(h, n1, situation, mode).v - spread_unchecked(h, n2, situation, mode).v)
}

/// A metric value or the reason it is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MetricSlot {
    Defined { value: f64, verdict: Verdict },
    Undefined { reason: MetricsError },
}

impl MetricSlot {
    fn from_result(metric: PairMetric, result: Result<f64, MetricsError>) -> Self {
        match result {
            Ok(value) => MetricSlot::Defined {
                value,
                verdict: verdict(metric, value),
            },
            Err(reason) => MetricSlot::Undefined { reason },
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            MetricSlot::Defined { value, .. } => Some(*value),
            MetricSlot::Undefined { .. } => None,
        }
    }

    pub fn verdict(&self) -> Verdict {
        match self {
            MetricSlot::Defined { verdict, .. } => *verdict,
            MetricSlot::Undefined { .. } => Verdict::Undefined,
        }
    }
}

/// Base figures at one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseFigures {
    pub n: usize,
    pub r_succeeded: usize,
    pub r_failed: usize,
    pub r_plus: f64,
    pub r_minus: f64,
    pub last_failed: usize,
    pub neg_age: usize,
    pub r_failures: usize,
    /// Absent when `r_failures` is 0.
    pub mtbtf: Option<f64>,
}

impl BaseFigures {
    pub fn compute(h: &ArtifactHistory, n: usize) -> Result<Self, MetricsError> {
        let r_succeeded = r_succeeded(h, n)?;
        let (r_plus, r_minus) = success_ratio(h, n)?;
        let last_failed = last_failed(h, n)?;
        let r_failures = r_failures(h, n)?;
        Ok(Self {
            n,
            r_succeeded,
            r_failed: n - r_succeeded,
            r_plus,
            r_minus,
            last_failed,
            neg_age: n - last_failed,
            r_failures,
            mtbtf: q3_mtbtf(h, n).ok(),
        })
    }
}

/// Q-metrics between two gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub n1: usize,
    pub n2: usize,
    pub q1: MetricSlot,
    pub q2: MetricSlot,
    pub q4: BTreeMap<Indicator, MetricSlot>,
    pub q5: MetricSlot,
    pub q6: BTreeMap<String, MetricSlot>,
}

impl PairMetrics {
    /// Every requested metric for the pair; failures land in their slot.
    pub fn compute(h: &ArtifactHistory, n1: usize, n2: usize, options: &ReportOptions) -> Self {
        Self {
            n1,
            n2,
            q1: MetricSlot::from_result(PairMetric::Q1, q1(h, n1, n2)),
            q2: MetricSlot::from_result(PairMetric::Q2, q2(h, n1, n2).map(|v| v as f64)),
            q4: options
                .indicators
                .iter()
                .map(|&ind| (ind, MetricSlot::from_result(PairMetric::Q4, q4(h, n1, n2, ind))))
                .collect(),
            q5: MetricSlot::from_result(PairMetric::Q5, q5(h, n1, n2)),
            q6: options
                .situations
                .iter()
                .map(|s| {
                    let slot = MetricSlot::from_result(PairMetric::Q6, q6(h, n1, n2, s, options.spread));
                    (s.clone(), slot)
                })
                .collect(),
        }
    }
}

/// Which optional metrics a report includes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub indicators: Vec<Indicator>,
    pub situations: Vec<String>,
    pub spread: SpreadMode,
}

/// Base figures at every gate and Q-metrics for consecutive gate pairs of
/// one artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub artifact: ArtifactId,
    /// Revisions in the artifact's full history.
    pub revisions: usize,
    /// Last evaluated gate.
    pub n: usize,
    pub spread: SpreadMode,
    pub gates: Vec<BaseFigures>,
    pub pairs: Vec<PairMetrics>,
}

impl MetricsReport {
    pub fn figures_at(&self, n: usize) -> Option<&BaseFigures> {
        self.gates.iter().find(|g| g.n == n)
    }

    pub fn pair(&self, n1: usize, n2: usize) -> Option<&PairMetrics> {
        self.pairs.iter().find(|p| p.n1 == n1 && p.n2 == n2)
    }
}

/// Checks that gates are non-empty, in range and strictly increasing.
pub fn validate_gates(h: &ArtifactHistory, gates: &[usize]) -> Result<(), MetricsError> {
    if gates.is_empty() {
        return Err(MetricsError::NoGates);
    }
    for &g in gates {
        check_n(h, g)?;
    }
    for w in gates.windows(2) {
        if w[0] >= w[1] {
            return Err(MetricsError::InvalidGateOrder { n1: w[0], n2: w[1] });
        }
    }
    Ok(())
}

pub fn compute_report(
    h: &ArtifactHistory,
    gates: &[usize],
    options: &ReportOptions,
) -> Result<MetricsReport, MetricsError> {
    validate_gates(h, gates)?;
    let figures = gates
        .iter()
        .map(|&g| BaseFigures::compute(h, g))
        .collect::<Result<Vec<_>, _>>()?;
    let pairs = gates
        .windows(2)
        .map(|w| PairMetrics::compute(h, w[0], w[1], options))
        .collect();
    Ok(MetricsReport {
        artifact: h.artifact().clone(),
        revisions: h.len(),
        n: *gates.last().expect("validated non-empty"),
        spread: options.spread,
        gates: figures,
        pairs,
    })
}

/// [`compute_report`] for every artifact, evaluated in parallel. Output is in
/// artifact order; on error the first failing artifact in that order wins.
pub fn compute_reports(
    set: &HistorySet,
    gates: &[usize],
    options: &ReportOptions,
) -> Result<Vec<MetricsReport>, (ArtifactId, MetricsError)> {
    let histories: Vec<&ArtifactHistory> = set.iter().collect();
    let results: Vec<_> = histories
        .par_iter()
        .map(|h| compute_report(h, gates, options).map_err(|e| (h.artifact().clone(), e)))
        .collect();
    results.into_iter().collect()
}
