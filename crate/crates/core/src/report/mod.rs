//! Gate evaluation, heatmaps and report rendering.

mod gates;
mod heatmap;
mod render;
mod selector;

pub use gates::{
    clipped_reports, evaluate_gates, reports_for_policy, Comparator, GatePolicy, GateRule, GateVerdict, NamedGate,
    Overall, PairStatus, RuleOutcome, RuleStatus, Severity, UndefinedPolicy,
};
pub use heatmap::{build_heatmap, heatmap_csv, min_max, render_heatmap_csv, HeatmapCell, HeatmapMatrix};
pub use render::{format_number, parse_report_json, render_report, ReportDocument, ReportFormat, SCHEMA};
pub use selector::MetricSelector;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("policy needs at least one gate and one rule")]
    EmptyPolicy,

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("no artifacts to report")]
    NoArtifacts,

    #[error("no metric selectors given")]
    NoSelectors,

    #[error("unsupported report schema {0:?}")]
    Schema(String),

    #[error("CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<csv::Error> for ReportError {
    fn from(e: csv::Error) -> Self {
        ReportError::Csv(e.to_string())
    }
}
