use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::gates::{GateVerdict, PairStatus, RuleStatus};
use super::ReportError;
use crate::metrics::{BaseFigures, MetricSlot, MetricsReport};

pub const SCHEMA: &str = "metametrics/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown format {other:?} (expected json or markdown)")),
        }
    }
}

/// The JSON report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub reports: Vec<MetricsReport>,
    pub verdicts: Vec<GateVerdict>,
}

/// Plain number when integral, six decimals otherwise.
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.6}")
    }
}

type FigureRow = (&'static str, fn(&BaseFigures) -> String);

const FIGURE_ROWS: [FigureRow; 8] = [
    ("R_succeeded", |g| g.r_succeeded.to_string()),
    ("R_failed", |g| g.r_failed.to_string()),
    ("R+", |g| format_number(g.r_plus)),
    ("R-", |g| format_number(g.r_minus)),
    ("failed", |g| g.last_failed.to_string()),
    ("age-", |g| g.neg_age.to_string()),
    ("R_failures", |g| g.r_failures.to_string()),
    ("MTBTF (Q3)", |g| g.mtbtf.map_or("undefined".into(), format_number)),
];

fn slot_cells(slot: &MetricSlot) -> (String, String) {
    match slot {
        MetricSlot::Defined { value, verdict } => (format_number(*value), verdict.to_string()),
        MetricSlot::Undefined { reason } => ("n/a".to_string(), format!("undefined: {reason}")),
    }
}

fn markdown(reports: &[MetricsReport], verdicts: &[GateVerdict], stamp: Option<u64>) -> String {
    let mut out = String::from("# Meta-metrics report\n\n");
    if let Some(t) = stamp {
        let _ = writeln!(out, "Generated at {t} (unix time)\n");
    }
    let mut sorted: Vec<&MetricsReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.artifact.cmp(&b.artifact));
    for report in sorted {
        let _ = writeln!(out, "## {}\n", report.artifact);
        let _ = writeln!(out, "Revisions: {}\n", report.revisions);

        if !report.gates.is_empty() {
            let mut header = String::from("| Figure |");
            let mut rule = String::from("|---|");
            for g in &report.gates {
                let _ = write!(header, " @{} |", g.n);
                rule.push_str("---:|");
            }
            let _ = writeln!(out, "{header}\n{rule}");
            for (name, cell) in FIGURE_ROWS {
                let _ = write!(out, "| {name} |");
                for g in &report.gates {
                    let _ = write!(out, " {} |", cell(g));
                }
                out.push('\n');
            }
            out.push('\n');
        }

        for pair in &report.pairs {
            let _ = writeln!(out, "### Gates {} -> {}\n", pair.n1, pair.n2);
            out.push_str("| Metric | Value | Verdict |\n|---|---:|---|\n");
            let mut row = |name: String, slot: &MetricSlot| {
                let (value, verdict) = slot_cells(slot);
                let _ = writeln!(out, "| {name} | {value} | {verdict} |");
            };
            row("Q1".into(), &pair.q1);
            row("Q2".into(), &pair.q2);
            for (ind, slot) in &pair.q4 {
                row(format!("Q4 {ind}"), slot);
            }
            row("Q5".into(), &pair.q5);
            for (s, slot) in &pair.q6 {
                row(format!("Q6 {s}"), slot);
            }
            out.push('\n');
        }

        for v in verdicts.iter().filter(|v| v.artifact == report.artifact) {
            let _ = writeln!(
                out,
                "### Gate {} ({}) -> {} ({}): **[{}]**\n",
                v.from.name, v.from.revision, v.to.name, v.to.revision, v.overall
            );
            if let PairStatus::GateOutOfRange { revisions } = v.status {
                let _ = writeln!(out, "History ends at revision {revisions}.\n");
            }
            out.push_str("| Rule | Value | Result |\n|---|---:|---|\n");
            for r in &v.rules {
                let value = r.value.map_or("n/a".to_string(), format_number);
                let status = match r.status {
                    RuleStatus::Pass => "pass",
                    RuleStatus::Warn => "warn",
                    RuleStatus::Fail => "fail",
                    RuleStatus::Skipped => "skipped",
                };
                let note = r
                    .undefined
                    .as_ref()
                    .map(|u| format!(" ({u})"))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "| {} {} {} ({}) | {value} | {status}{note} |",
                    r.rule.metric,
                    r.rule.cmp.symbol(),
                    format_number(r.rule.threshold),
                    r.rule.severity,
                );
            }
            out.push('\n');
        }
    }
    out
}

/// Renders reports and gate verdicts. Output depends only on the inputs.
pub fn render_report(
    reports: &[MetricsReport],
    verdicts: &[GateVerdict],
    format: ReportFormat,
    stamp: Option<u64>,
) -> Result<String, ReportError> {
    match format {
        ReportFormat::Json => {
            let mut sorted = reports.to_vec();
            sorted.sort_by(|a, b| a.artifact.cmp(&b.artifact));
            let doc = ReportDocument {
                schema: SCHEMA.to_string(),
                generated_at_unix: stamp,
                reports: sorted,
                verdicts: verdicts.to_vec(),
            };
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Markdown => Ok(markdown(reports, verdicts, stamp)),
    }
}

pub fn parse_report_json(text: &str) -> Result<ReportDocument, ReportError> {
    let doc: ReportDocument = serde_json::from_str(text)?;
    if doc.schema != SCHEMA {
        return Err(ReportError::Schema(doc.schema));
    }
    Ok(doc)
}
