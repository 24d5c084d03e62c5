//! Quality-gate policies and their evaluation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{MetricSelector, ReportError};
use crate::history::{ArtifactHistory, ArtifactId, HistorySet};
use crate::metrics::{
    compute_report, SpreadMode, MetricsReport, PairMetrics, ReportOptions,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedGate {
    pub name: String,
    pub revision: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Ge => value >= threshold,
            Comparator::Gt => value > threshold,
            Comparator::Le => value <= threshold,
            Comparator::Lt => value < threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
            Comparator::Le => "<=",
            Comparator::Lt => "<",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warn,
    Fail,
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Severity::Warn => "warn",
            Severity::Fail => "fail",
        })
    }
}

/// What an undefined metric does to a rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UndefinedPolicy {
    #[default]
    Warn,
    Fail,
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRule {
    pub metric: MetricSelector,
    pub cmp: Comparator,
    pub threshold: f64,
    pub severity: Severity,
}

/// Named gates plus threshold rules, read from JSON:
///
/// ```json
/// { "gates": [{"name": "alpha", "revision": 768}, {"name": "beta", "revision": 892}],
///   "rules": [{"metric": "q2", "cmp": ">=", "threshold": 0, "severity": "fail"}],
///   "undefined": "warn" }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy")]
pub struct GatePolicy {
    pub gates: Vec<NamedGate>,
    pub rules: Vec<GateRule>,
    pub undefined: UndefinedPolicy,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    gates: Vec<NamedGate>,
    rules: Vec<GateRule>,
    #[serde(default)]
    undefined: UndefinedPolicy,
}

impl TryFrom<RawPolicy> for GatePolicy {
    type Error = ReportError;

    fn try_from(raw: RawPolicy) -> Result<Self, Self::Error> {
        GatePolicy::new(raw.gates, raw.rules, raw.undefined)
    }
}

impl GatePolicy {
    pub fn new(
        gates: Vec<NamedGate>,
        rules: Vec<GateRule>,
        undefined: UndefinedPolicy,
    ) -> Result<Self, ReportError> {
        if gates.is_empty() || rules.is_empty() {
            return Err(ReportError::EmptyPolicy);
        }
        let invalid = |msg: String| Err(ReportError::InvalidPolicy(msg));
        if gates.iter().any(|g| g.revision == 0) {
            return invalid("gate revisions start at 1".into());
        }
        if gates.windows(2).any(|w| w[0].revision >= w[1].revision) {
            return invalid("gate revisions must be strictly increasing".into());
        }
        for rule in &rules {
            if !rule.threshold.is_finite() {
                return invalid(format!("rule on {}: threshold must be finite", rule.metric));
            }
            if !rule.metric.is_q_metric() {
                return invalid(format!(
                    "rule on {}: gate rules take q1, q2, q3, q4:<indicator>, q5 or q6:<situation>",
                    rule.metric
                ));
            }
        }
        Ok(Self {
            gates,
            rules,
            undefined,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::InvalidPolicy(e.to_string()))
    }

    /// Consecutive gate pairs. A single gate is paired with itself.
    pub fn gate_pairs(&self) -> Vec<(&NamedGate, &NamedGate)> {
        if self.gates.len() == 1 {
            return vec![(&self.gates[0], &self.gates[0])];
        }
        self.gates.windows(2).map(|w| (&w[0], &w[1])).collect()
    }

    /// Report options that cover every indicator and situation the rules
    /// mention.
    pub fn report_options(&self, spread: SpreadMode) -> ReportOptions {
        let mut indicators = BTreeSet::new();
        let mut situations = BTreeSet::new();
        for rule in &self.rules {
            match &rule.metric {
                MetricSelector::Q4(ind) => {
                    indicators.insert(*ind);
                }
                MetricSelector::Q6(s) => {
                    situations.insert(s.clone());
                }
                _ => {}
            }
        }
        ReportOptions {
            indicators: indicators.into_iter().collect(),
            situations: situations.into_iter().collect(),
            spread,
        }
    }
}

/// Reports for every artifact at the policy's gates that fit the artifact's
/// history. A single-gate policy also gets the self pair at that gate.
pub fn reports_for_policy(
    set: &HistorySet,
    policy: &GatePolicy,
    spread: SpreadMode,
) -> Vec<MetricsReport> {
    let gates: Vec<usize> = policy.gates.iter().map(|g| g.revision).collect();
    clipped(set, &gates, &policy.report_options(spread), gates.len() == 1)
}

/// Reports at the given strictly increasing gates, dropping per artifact
/// the gates past its last revision. An artifact shorter than every gate
/// gets a report with `n == 0` and no figures.
pub fn clipped_reports(set: &HistorySet, gates: &[usize], options: &ReportOptions) -> Vec<MetricsReport> {
    clipped(set, gates, options, false)
}

fn clipped(
    set: &HistorySet,
    gates: &[usize],
    options: &ReportOptions,
    self_pair: bool,
) -> Vec<MetricsReport> {
    use rayon::prelude::*;
    let histories: Vec<&ArtifactHistory> = set.iter().collect();
    histories
        .par_iter()
        .map(|h| clipped_report(h, gates, options, self_pair))
        .collect()
}

fn clipped_report(
    h: &ArtifactHistory,
    gates: &[usize],
    options: &ReportOptions,
    self_pair: bool,
) -> MetricsReport {
    let gates: Vec<usize> = gates.iter().copied().filter(|&g| g <= h.len()).collect();
    if gates.is_empty() {
        return MetricsReport {
            artifact: h.artifact().clone(),
            revisions: h.len(),
            n: 0,
            spread: options.spread,
            gates: Vec::new(),
            pairs: Vec::new(),
        };
    }
    let mut report = compute_report(h, &gates, options).expect("gates filtered to the history");
    if self_pair {
        report.pairs.push(PairMetrics::compute(h, gates[0], gates[0], options));
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Pass,
    Warn,
    Fail,
}

impl std::fmt::Display for Overall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Overall::Pass => "PASS",
            Overall::Warn => "WARN",
            Overall::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleStatus {
    Pass,
    Warn,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: GateRule,
    pub value: Option<f64>,
    pub status: RuleStatus,
    /// Why the metric is undefined, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub undefined: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairStatus {
    Evaluated,
    /// The artifact's history ends before the later gate.
    GateOutOfRange { revisions: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateVerdict {
    pub artifact: ArtifactId,
    pub from: NamedGate,
    pub to: NamedGate,
    pub status: PairStatus,
    pub rules: Vec<RuleOutcome>,
    pub overall: Overall,
}

fn undefined_status(policy: UndefinedPolicy) -> RuleStatus {
    match policy {
        UndefinedPolicy::Warn => RuleStatus::Warn,
        UndefinedPolicy::Fail => RuleStatus::Fail,
        UndefinedPolicy::Ignore => RuleStatus::Skipped,
    }
}

fn severity_status(severity: Severity) -> RuleStatus {
    match severity {
        Severity::Warn => RuleStatus::Warn,
        Severity::Fail => RuleStatus::Fail,
    }
}

fn overall(rules: &[RuleOutcome]) -> Overall {
    rules
        .iter()
        .map(|r| match r.status {
            RuleStatus::Fail => Overall::Fail,
            RuleStatus::Warn => Overall::Warn,
            RuleStatus::Pass | RuleStatus::Skipped => Overall::Pass,
        })
        .max()
        .unwrap_or(Overall::Pass)
}

/// One verdict per artifact and consecutive gate pair, ordered by artifact
/// then gate.
pub fn evaluate_gates(
    reports: &[MetricsReport],
    policy: &GatePolicy,
) -> Result<Vec<GateVerdict>, ReportError> {
    if policy.gates.is_empty() || policy.rules.is_empty() {
        return Err(ReportError::EmptyPolicy);
    }
    let mut sorted: Vec<&MetricsReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.artifact.cmp(&b.artifact));

    let mut verdicts = Vec::new();
    for report in sorted {
        for (from, to) in policy.gate_pairs() {
            let (n1, n2) = (from.revision, to.revision);
            let in_range = n2 <= report.revisions;
            let rules: Vec<RuleOutcome> = policy
                .rules
                .iter()
                .map(|rule| {
                    let looked_up = if in_range {
                        rule.metric.lookup(report, n1, n2)
                    } else {
                        None
                    };
                    match looked_up {
                        Some(Ok(value)) => RuleOutcome {
                            rule: rule.clone(),
                            value: Some(value),
                            status: if rule.cmp.holds(value, rule.threshold) {
                                RuleStatus::Pass
                            } else {
                                severity_status(rule.severity)
                            },
                            undefined: None,
                        },
                        Some(Err(reason)) => RuleOutcome {
                            rule: rule.clone(),
                            value: None,
                            status: undefined_status(policy.undefined),
                            undefined: Some(reason.to_string()),
                        },
                        None => RuleOutcome {
                            rule: rule.clone(),
                            value: None,
                            status: undefined_status(policy.undefined),
                            undefined: Some(if in_range {
                                format!("{} not computed for gates ({n1}, {n2})", rule.metric)
                            } else {
                                format!("gate {n2} beyond the last revision {}", report.revisions)
                            }),
                        },
                    }
                })
                .collect();
            verdicts.push(GateVerdict {
                artifact: report.artifact.clone(),
                from: from.clone(),
                to: to.clone(),
                status: if in_range {
                    PairStatus::Evaluated
                } else {
                    PairStatus::GateOutOfRange {
                        revisions: report.revisions,
                    }
                },
                overall: overall(&rules),
                rules,
            });
        }
    }
    Ok(verdicts)
}
