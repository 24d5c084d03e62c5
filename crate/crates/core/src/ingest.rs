//! JSON Lines history files.
//!
//! One revision record per line:
//!
//! ```text
//! {"artifact":"CCS","revision":1,"result":"pass","sloc":1200,"duration_s":3.5,"acting_s":{"cutin":1.25}}
//! ```
//!
//! Required keys are `artifact`, `revision` (integer >= 1) and `result`
//! (`"pass"` or `"fail"`). Optional keys are `sloc`, `misra_warnings`,
//! `mccabe`, `uncovered` (integers), `duration_s` (seconds) and `acting_s`
//! (situation id to seconds). Blank lines are skipped. Unknown keys are
//! rejected unless loading leniently.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::history::{
    build_history, ArtifactId, HistoryError, HistorySet, IndicatorSample, RevisionRecord,
    TestOutcome,
};

const KEYS: [&str; 9] = [
    "artifact",
    "revision",
    "result",
    "sloc",
    "misra_warnings",
    "mccabe",
    "uncovered",
    "duration_s",
    "acting_s",
];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {cause}")]
    Parse { line: usize, cause: String },

    #[error("line {line}: field `{field}`: {reason}")]
    Schema {
        line: usize,
        field: String,
        reason: String,
    },

    #[error("{}{source}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    History {
        line: Option<usize>,
        source: HistoryError,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: Box<IngestError>,
    },

    #[error("{} invalid lines", .0.len())]
    Many(Vec<IngestError>),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl IngestError {
    /// The individual errors; a single error yields itself.
    pub fn errors(&self) -> Vec<&IngestError> {
        match self {
            IngestError::Many(all) => all.iter().collect(),
            IngestError::InFile { source, .. } => source.errors(),
            other => vec![other],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Ignore unknown keys instead of rejecting them.
    pub lenient: bool,
    /// Remap each artifact's increasing revision numbers to `1..=N`.
    pub renumber: bool,
    /// Keep going after a bad line and report every bad line.
    pub collect_errors: bool,
}

fn schema(line: usize, field: &str, reason: impl Into<String>) -> IngestError {
    IngestError::Schema {
        line,
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn count_field(
    obj: &Map<String, Value>,
    line: usize,
    key: &str,
    min: u64,
) -> Result<Option<u64>, IngestError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => match v.as_u64() {
            Some(n) if n >= min => Ok(Some(n)),
            _ => Err(schema(line, key, format!("expected an integer >= {min}"))),
        },
    }
}

fn seconds(v: &Value, line: usize, field: &str) -> Result<f64, IngestError> {
    match v.as_f64() {
        Some(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => Err(schema(line, field, "expected a number >= 0")),
    }
}

/// Parses one non-blank line.
pub fn parse_line(text: &str, line: usize, lenient: bool) -> Result<RevisionRecord, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| IngestError::Parse {
        line,
        cause: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(IngestError::Parse {
            line,
            cause: "expected a JSON object".into(),
        });
    };
    if !lenient {
        if let Some(key) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(schema(line, key, "unknown key"));
        }
    }

    let artifact = match obj.get("artifact") {
        Some(Value::String(s)) => {
            ArtifactId::new(s.clone()).map_err(|_| schema(line, "artifact", "must not be blank"))?
        }
        Some(_) => return Err(schema(line, "artifact", "expected a string")),
        None => return Err(schema(line, "artifact", "required")),
    };
    let revision = match obj.get("revision") {
        Some(v) => match v.as_u64() {
            Some(n) if n >= 1 => usize::try_from(n)
                .map_err(|_| schema(line, "revision", "too large"))?,
            _ => return Err(schema(line, "revision", "expected an integer >= 1")),
        },
        None => return Err(schema(line, "revision", "required")),
    };
    let outcome = match obj.get("result").and_then(Value::as_str) {
        Some("pass") => TestOutcome::Pass,
        Some("fail") => TestOutcome::Fail,
        Some(_) => return Err(schema(line, "result", "expected \"pass\" or \"fail\"")),
        None => return Err(schema(line, "result", "required, \"pass\" or \"fail\"")),
    };

    let mut indicators = IndicatorSample {
        sloc: count_field(&obj, line, "sloc", 1)?,
        misra_warnings: count_field(&obj, line, "misra_warnings", 0)?,
        mccabe: count_field(&obj, line, "mccabe", 1)?,
        uncovered: count_field(&obj, line, "uncovered", 0)?,
        duration: obj
            .get("duration_s")
            .map(|v| seconds(v, line, "duration_s"))
            .transpose()?,
        acting: BTreeMap::new(),
    };
    match obj.get("acting_s") {
        None => {}
        Some(Value::Object(map)) => {
            for (situation, t) in map {
                if situation.is_empty() {
                    return Err(schema(line, "acting_s", "situation id must not be empty"));
                }
                let t = seconds(t, line, &format!("acting_s.{situation}"))?;
                indicators.acting.insert(situation.clone(), t);
            }
        }
        Some(_) => return Err(schema(line, "acting_s", "expected an object")),
    }

    Ok(RevisionRecord {
        artifact,
        revision,
        outcome,
        indicators,
    })
}

/// Parses every record of one file without checking history density.
pub fn read_records<R: BufRead>(
    reader: R,
    options: &LoadOptions,
) -> Result<Vec<(usize, RevisionRecord)>, IngestError> {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (k, text) in reader.lines().enumerate() {
        let line = k + 1;
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let parsed = if line == 1 && text.starts_with('\u{feff}') {
            Err(IngestError::Parse {
                line,
                cause: "byte order mark not allowed".into(),
            })
        } else {
            parse_line(&text, line, options.lenient)
        };
        match parsed {
            Ok(r) => records.push((line, r)),
            Err(e) if options.collect_errors => errors.push(e),
            Err(e) => return Err(e),
        }
    }
    match errors.len() {
        0 => Ok(records),
        1 => Err(errors.remove(0)),
        _ => Err(IngestError::Many(errors)),
    }
}

/// Reads a history file. All errors name the offending line where one exists.
pub fn load_history_set<R: BufRead>(reader: R, options: &LoadOptions) -> Result<HistorySet, IngestError> {
    let records = read_records(reader, options)?
        .into_iter()
        .map(|(line, r)| ((0, line), r))
        .collect();
    pool(records, options).map_err(|(_, e)| e)
}

/// Reads several files in parallel and pools their records, so one
/// artifact's history may be split across files. Errors name the file.
pub fn load_history_files<P: AsRef<Path> + Sync>(
    paths: &[P],
    options: &LoadOptions,
) -> Result<HistorySet, IngestError> {
    use rayon::prelude::*;
    let in_file = |k: usize, e: IngestError| IngestError::InFile {
        path: paths[k].as_ref().to_path_buf(),
        source: Box::new(e),
    };
    let per_file: Vec<Result<Vec<(usize, RevisionRecord)>, IngestError>> = paths
        .par_iter()
        .map(|p| {
            let file = File::open(p.as_ref())?;
            read_records(io::BufReader::new(file), options)
        })
        .collect();
    let mut pooled = Vec::new();
    for (k, result) in per_file.into_iter().enumerate() {
        let records = result.map_err(|e| in_file(k, e))?;
        pooled.extend(records.into_iter().map(|(line, r)| ((k, line), r)));
    }
    pool(pooled, options).map_err(|(file, e)| match file {
        Some(k) if paths.len() > 1 => in_file(k, e),
        _ => e,
    })
}

// (file index, line)
type Located = ((usize, usize), RevisionRecord);

fn pool(mut records: Vec<Located>, options: &LoadOptions) -> Result<HistorySet, (Option<usize>, IngestError)> {
    if options.renumber {
        renumber(&mut records)?;
    }
    assemble(records)
}

fn renumber(records: &mut [Located]) -> Result<(), (Option<usize>, IngestError)> {
    let mut by_artifact: BTreeMap<ArtifactId, Vec<usize>> = BTreeMap::new();
    for (idx, (_, r)) in records.iter().enumerate() {
        by_artifact.entry(r.artifact.clone()).or_default().push(idx);
    }
    for (artifact, mut idxs) in by_artifact {
        idxs.sort_by_key(|&i| (records[i].1.revision, records[i].0));
        for w in idxs.windows(2) {
            let (a, b) = (&records[w[0]], &records[w[1]]);
            if a.1.revision == b.1.revision {
                let (file, line) = b.0;
                return Err((
                    Some(file),
                    IngestError::History {
                        line: Some(line),
                        source: HistoryError::DuplicateRevision {
                            artifact,
                            revision: b.1.revision,
                        },
                    },
                ));
            }
        }
        for (dense, i) in idxs.into_iter().enumerate() {
            records[i].1.revision = dense + 1;
        }
    }
    Ok(())
}

fn assemble(records: Vec<Located>) -> Result<HistorySet, (Option<usize>, IngestError)> {
    let mut locations: Vec<(ArtifactId, usize, (usize, usize))> = records
        .iter()
        .map(|(loc, r)| (r.artifact.clone(), r.revision, *loc))
        .collect();
    locations.sort_by_key(|(_, _, loc)| *loc);
    build_history(records.into_iter().map(|(_, r)| r)).map_err(|source| {
        let loc = match &source {
            // second occurrence of the duplicate
            HistoryError::DuplicateRevision { artifact, revision } => locations
                .iter()
                .filter(|(a, i, _)| a == artifact && i == revision)
                .map(|(_, _, loc)| *loc)
                .nth(1),
            // first record after the hole
            HistoryError::GapInHistory { artifact, missing } => locations
                .iter()
                .filter(|(a, i, _)| a == artifact && i > missing)
                .min_by_key(|(_, i, _)| *i)
                .map(|(_, _, loc)| *loc),
            _ => None,
        };
        (
            loc.map(|(file, _)| file),
            IngestError::History {
                line: loc.map(|(_, line)| line),
                source,
            },
        )
    })
}

#[derive(Serialize)]
struct Line<'a> {
    artifact: &'a str,
    revision: usize,
    result: TestOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    sloc: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    misra_warnings: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mccabe: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uncovered: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration_s: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    acting_s: &'a BTreeMap<String, f64>,
}

/// Canonical form: artifacts in lexicographic order, revisions ascending,
/// keys in schema order, acting situations sorted.
pub fn write_history_set<W: Write>(set: &HistorySet, mut sink: W) -> io::Result<()> {
    for h in set {
        for r in h.records() {
            let line = Line {
                artifact: r.artifact.as_str(),
                revision: r.revision,
                result: r.outcome,
                sloc: r.indicators.sloc,
                misra_warnings: r.indicators.misra_warnings,
                mccabe: r.indicators.mccabe,
                uncovered: r.indicators.uncovered,
                duration_s: r.indicators.duration,
                acting_s: &r.indicators.acting,
            };
            serde_json::to_writer(&mut sink, &line)?;
            sink.write_all(b"\n")?;
        }
    }
    sink.flush()
}

pub fn to_string(set: &HistorySet) -> String {
    let mut buf = Vec::new();
    write_history_set(set, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
