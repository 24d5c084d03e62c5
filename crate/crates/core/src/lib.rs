//! Meta-metrics over per-revision test and simulation results.
//!
//! A meta-metric is computed over a whole revision history of one development
//! artifact rather than over a single run: success ratios, the age of the last
//! failure, mean time between test failures, normalized code indicators,
//! execution time and the spread of acting time points. Comparing a metric
//! at two quality gates tells whether quality held up between them.
//!
//! ```
//! use metametrics::history::{ArtifactId, RevisionRecord, TestOutcome, build_history};
//! use metametrics::metrics;
//!
//! let id = ArtifactId::new("brake-ctl").unwrap();
//! let records = [0, 1, 1, 0, 1].iter().enumerate().map(|(k, &res)| {
//!     let outcome = if res == 1 { TestOutcome::Pass } else { TestOutcome::Fail };
//!     RevisionRecord::new(id.clone(), k + 1, outcome)
//! });
//! let set = build_history(records).unwrap();
//! let h = set.get(&id).unwrap();
//!
//! assert_eq!(metrics::r_succeeded(h, 5).unwrap(), 3);
//! assert_eq!(metrics::r_failures(h, 5).unwrap(), 2);
//! assert_eq!(metrics::q3_mtbtf(h, 5).unwrap(), 1.5);
//! assert_eq!(metrics::q2(h, 3, 5).unwrap(), -1);
//! ```

pub mod history;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod synth;

pub use history::{
    ArtifactHistory, ArtifactId, HistoryError, HistorySet, IndicatorSample, RevisionRecord,
    TestOutcome,
};
pub use metrics::{SpreadMode, Indicator, MetricsError, MetricsReport, ReportOptions, Verdict};
