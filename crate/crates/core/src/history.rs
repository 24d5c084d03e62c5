//! Revision histories of development artifacts.
//!
//! Revisions are dense and 1-based: an artifact with `N` revisions has
//! records for exactly `1, 2, ..., N`. Real repository revision ids must be
//! remapped before they get here (see [`crate::ingest::LoadOptions::renumber`]).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryError {
    #[error("no revision records given")]
    EmptyInput,

    #[error("artifact {artifact}: revision {revision} appears more than once")]
    DuplicateRevision { artifact: ArtifactId, revision: usize },

    #[error("artifact {artifact}: revision {missing} is missing")]
    GapInHistory { artifact: ArtifactId, missing: usize },

    #[error("revision {n} out of range 1..={len}")]
    OutOfRange { n: usize, len: usize },

    #[error("revision numbers start at 1, got 0")]
    ZeroRevision,

    #[error("artifact id must contain a non-whitespace character")]
    InvalidArtifactId,

    #[error("{field}: {reason}")]
    InvalidIndicator { field: String, reason: String },

    #[error("history records belong to artifact {expected}, found {found}")]
    ForeignRecord { expected: ArtifactId, found: ArtifactId },
}

/// Name of one development artifact (software unit or implementation model).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArtifactId(String);

impl ArtifactId {
    pub fn new(id: impl Into<String>) -> Result<Self, HistoryError> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(HistoryError::InvalidArtifactId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ArtifactId {
    type Error = HistoryError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ArtifactId> for String {
    fn from(id: ArtifactId) -> Self {
        id.0
    }
}

impl fmt::Display for ArtifactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestOutcome {
    Pass,
    Fail,
}

impl TestOutcome {
    /// `1` for a pass, `0` for a failure.
    pub fn res(self) -> u8 {
        match self {
            TestOutcome::Pass => 1,
            TestOutcome::Fail => 0,
        }
    }

    pub fn is_pass(self) -> bool {
        self == TestOutcome::Pass
    }
}

/// Indicator measurements taken at one revision. Every field is optional;
/// metrics that need a value check for it and report what is missing.
///
/// Durations and acting time points are in seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSample {
    pub sloc: Option<u64>,
    pub misra_warnings: Option<u64>,
    pub mccabe: Option<u64>,
    pub uncovered: Option<u64>,
    pub duration: Option<f64>,
    pub acting: BTreeMap<String, f64>,
}

impl IndicatorSample {
    pub fn validate(&self) -> Result<(), HistoryError> {
        let bad = |field: &str, reason: &str| HistoryError::InvalidIndicator {
            field: field.to_string(),
            reason: reason.to_string(),
        };
        if self.sloc == Some(0) {
            return Err(bad("sloc", "must be positive"));
        }
        if self.mccabe == Some(0) {
            return Err(bad("mccabe", "must be at least 1"));
        }
        if let Some(d) = self.duration {
            if !d.is_finite() || d < 0.0 {
                return Err(bad("duration", "must be a finite number >= 0"));
            }
        }
        for (situation, &t) in &self.acting {
            if situation.is_empty() {
                return Err(bad("acting", "situation id must not be empty"));
            }
            if !t.is_finite() || t < 0.0 {
                return Err(bad(
                    &format!("acting.{situation}"),
                    "must be a finite number >= 0",
                ));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        *self == IndicatorSample::default()
    }
}

/// One artifact's outcome and measurements at one revision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub artifact: ArtifactId,
    pub revision: usize,
    pub outcome: TestOutcome,
    pub indicators: IndicatorSample,
}

impl RevisionRecord {
    pub fn new(artifact: ArtifactId, revision: usize, outcome: TestOutcome) -> Self {
        Self {
            artifact,
            revision,
            outcome,
            indicators: IndicatorSample::default(),
        }
    }

    pub fn with_indicators(mut self, indicators: IndicatorSample) -> Self {
        self.indicators = indicators;
        self
    }
}

/// The dense revision sequence `1..=N` of one artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHistory")]
pub struct ArtifactHistory {
    artifact: ArtifactId,
    records: Vec<RevisionRecord>,
}

#[derive(Deserialize)]
struct RawHistory {
    artifact: ArtifactId,
    records: Vec<RevisionRecord>,
}

impl TryFrom<RawHistory> for ArtifactHistory {
    type Error = HistoryError;

    fn try_from(raw: RawHistory) -> Result<Self, Self::Error> {
        ArtifactHistory::new(raw.artifact, raw.records)
    }
}

impl ArtifactHistory {
    /// Builds a history from records of a single artifact, in any order.
    pub fn new(
        artifact: ArtifactId,
        mut records: Vec<RevisionRecord>,
    ) -> Result<Self, HistoryError> {
        if records.is_empty() {
            return Err(HistoryError::EmptyInput);
        }
        if let Some(r) = records.iter().find(|r| r.artifact != artifact) {
            return Err(HistoryError::ForeignRecord {
                expected: artifact,
                found: r.artifact.clone(),
            });
        }
        records.sort_by_key(|r| r.revision);
        if records[0].revision == 0 {
            return Err(HistoryError::ZeroRevision);
        }
        for pair in records.windows(2) {
            if pair[0].revision == pair[1].revision {
                return Err(HistoryError::DuplicateRevision {
                    artifact,
                    revision: pair[0].revision,
                });
            }
        }
        for (k, r) in records.iter().enumerate() {
            if r.revision != k + 1 {
                return Err(HistoryError::GapInHistory {
                    artifact,
                    missing: k + 1,
                });
            }
            r.indicators.validate()?;
        }
        Ok(Self { artifact, records })
    }

    /// Shorthand for a history without indicator data, `res` given as 0/1.
    pub fn from_results(artifact: ArtifactId, res: &[u8]) -> Result<Self, HistoryError> {
        let records = res
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let outcome = if r == 0 {
                    TestOutcome::Fail
                } else {
                    TestOutcome::Pass
                };
                RevisionRecord::new(artifact.clone(), k + 1, outcome)
            })
            .collect();
        Self::new(artifact, records)
    }

    pub fn artifact(&self) -> &ArtifactId {
        &self.artifact
    }

    /// Number of revisions `N`.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Always false; a history has at least one revision.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[RevisionRecord] {
        &self.records
    }

    /// Record for revision `i` (1-based).
    pub fn record(&self, i: usize) -> Option<&RevisionRecord> {
        i.checked_sub(1).and_then(|k| self.records.get(k))
    }

    pub fn outcomes(&self) -> impl Iterator<Item = TestOutcome> + '_ {
        self.records.iter().map(|r| r.outcome)
    }

    /// The sub-history of revisions `1..=n`.
    pub fn prefix(&self, n: usize) -> Result<ArtifactHistory, HistoryError> {
        if n == 0 || n > self.len() {
            return Err(HistoryError::OutOfRange { n, len: self.len() });
        }
        Ok(Self {
            artifact: self.artifact.clone(),
            records: self.records[..n].to_vec(),
        })
    }

    pub fn into_records(self) -> Vec<RevisionRecord> {
        self.records
    }
}

/// Histories of several artifacts keyed by artifact id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<ArtifactId, ArtifactHistory>", into = "BTreeMap<ArtifactId, ArtifactHistory>")]
pub struct HistorySet {
    histories: BTreeMap<ArtifactId, ArtifactHistory>,
}

impl TryFrom<BTreeMap<ArtifactId, ArtifactHistory>> for HistorySet {
    type Error = HistoryError;

    fn try_from(histories: BTreeMap<ArtifactId, ArtifactHistory>) -> Result<Self, Self::Error> {
        for (id, h) in &histories {
            if id != h.artifact() {
                return Err(HistoryError::ForeignRecord {
                    expected: id.clone(),
                    found: h.artifact().clone(),
                });
            }
        }
        Ok(Self { histories })
    }
}

impl From<HistorySet> for BTreeMap<ArtifactId, ArtifactHistory> {
    fn from(set: HistorySet) -> Self {
        set.histories
    }
}

impl HistorySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a history, replacing any previous history of the same artifact.
    pub fn insert(&mut self, history: ArtifactHistory) -> Option<ArtifactHistory> {
        self.histories.insert(history.artifact().clone(), history)
    }

    pub fn get(&self, id: &ArtifactId) -> Option<&ArtifactHistory> {
        self.histories.get(id)
    }

    /// Histories in lexicographic artifact order.
    pub fn iter(&self) -> impl Iterator<Item = &ArtifactHistory> {
        self.histories.values()
    }

    pub fn artifacts(&self) -> impl Iterator<Item = &ArtifactId> {
        self.histories.keys()
    }

    pub fn len(&self) -> usize {
        self.histories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histories.is_empty()
    }

    pub fn record_count(&self) -> usize {
        self.histories.values().map(ArtifactHistory::len).sum()
    }

    /// Combines two sets. Records of an artifact present in both are pooled
    /// and the density rules are checked again, so overlapping artifacts end
    /// in [`HistoryError::DuplicateRevision`]. To split one artifact's
    /// history over several files, pool the records instead
    /// ([`crate::ingest::load_history_files`]).
    pub fn merge(self, other: HistorySet) -> Result<HistorySet, HistoryError> {
        let records = self
            .histories
            .into_values()
            .chain(other.histories.into_values())
            .flat_map(ArtifactHistory::into_records);
        build_history(records)
    }
}

impl<'a> IntoIterator for &'a HistorySet {
    type Item = &'a ArtifactHistory;
    type IntoIter = std::collections::btree_map::Values<'a, ArtifactId, ArtifactHistory>;

    fn into_iter(self) -> Self::IntoIter {
        self.histories.values()
    }
}

/// Groups unordered records by artifact and validates each history.
///
/// Errors are reported for the lexicographically first offending artifact,
/// so the result does not depend on input order.
pub fn build_history(
    records: impl IntoIterator<Item = RevisionRecord>,
) -> Result<HistorySet, HistoryError> {
    let mut grouped: BTreeMap<ArtifactId, Vec<RevisionRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.artifact.clone()).or_default().push(r);
    }
    if grouped.is_empty() {
        return Err(HistoryError::EmptyInput);
    }
    let mut set = HistorySet::new();
    for (id, recs) in grouped {
        set.insert(ArtifactHistory::new(id, recs)?);
    }
    Ok(set)
}
