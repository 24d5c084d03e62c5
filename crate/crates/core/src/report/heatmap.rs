//! Cross-artifact heatmaps with per-column min-max scaling.

use serde::{Deserialize, Serialize};

use super::{MetricSelector, ReportError};
use crate::history::ArtifactId;
use crate::metrics::MetricsReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub raw: Option<f64>,
    pub normalized: Option<f64>,
}

impl HeatmapCell {
    pub fn is_defined(&self) -> bool {
        self.raw.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapMatrix {
    pub gate: usize,
    pub rows: Vec<ArtifactId>,
    pub columns: Vec<MetricSelector>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<HeatmapCell>>,
}

/// Scales defined values to `[0, 1]`; a constant column maps to 0.5.
pub fn min_max(values: &[Option<f64>]) -> Vec<Option<f64>> {
    let defined = values.iter().flatten();
    let min = defined.clone().copied().fold(f64::INFINITY, f64::min);
    let max = defined.copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| {
            v.map(|x| {
                if max > min {
                    ((x - min) / (max - min)).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
        })
        .collect()
}

fn cell_value(report: &MetricsReport, selector: &MetricSelector, gate: usize) -> Option<f64> {
    if selector.is_q_metric() && *selector != MetricSelector::Q3 {
        // the pair that ends at the gate, preferring a real predecessor
        let pair = report
            .pairs
            .iter()
            .filter(|p| p.n2 == gate)
            .min_by_key(|p| p.n1 == p.n2)?;
        selector.lookup(report, pair.n1, gate)?.ok()
    } else {
        selector.lookup(report, gate, gate)?.ok()
    }
}

/// Rows in artifact order. Q-metrics come from the gate pair that ends at
/// `gate`; artifacts without that gate get undefined cells.
pub fn build_heatmap(
    reports: &[MetricsReport],
    selectors: &[MetricSelector],
    gate: usize,
) -> Result<HeatmapMatrix, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::NoArtifacts);
    }
    if selectors.is_empty() {
        return Err(ReportError::NoSelectors);
    }
    let mut sorted: Vec<&MetricsReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.artifact.cmp(&b.artifact));

    let raw: Vec<Vec<Option<f64>>> = sorted
        .iter()
        .map(|r| selectors.iter().map(|s| cell_value(r, s, gate)).collect())
        .collect();
    let mut cells: Vec<Vec<HeatmapCell>> = raw
        .iter()
        .map(|row| {
            row.iter()
                .map(|&raw| HeatmapCell {
                    raw,
                    normalized: None,
                })
                .collect()
        })
        .collect();
    for col in 0..selectors.len() {
        let column: Vec<Option<f64>> = raw.iter().map(|row| row[col]).collect();
        for (row, normalized) in min_max(&column).into_iter().enumerate() {
            cells[row][col].normalized = normalized;
        }
    }
    Ok(HeatmapMatrix {
        gate,
        rows: sorted.iter().map(|r| r.artifact.clone()).collect(),
        columns: selectors.to_vec(),
        cells,
    })
}

fn write_block(
    matrix: &HeatmapMatrix,
    pick: impl Fn(&HeatmapCell) -> Option<String>,
) -> Result<String, ReportError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["artifact".to_string()];
    header.extend(matrix.columns.iter().map(ToString::to_string));
    w.write_record(&header)?;
    for (id, row) in matrix.rows.iter().zip(&matrix.cells) {
        let mut record = vec![id.to_string()];
        record.extend(row.iter().map(|c| pick(c).unwrap_or_default()));
        w.write_record(&record)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

/// Normalized values with six decimals, then a `# raw` line and the raw
/// values. Undefined cells are empty fields.
pub fn heatmap_csv(matrix: &HeatmapMatrix) -> Result<String, ReportError> {
    let mut out = write_block(matrix, |c| c.normalized.map(|v| format!("{v:.6}")))?;
    out.push_str("# raw\n");
    out.push_str(&write_block(matrix, |c| c.raw.map(|v| v.to_string()))?);
    Ok(out)
}

pub fn render_heatmap_csv(
    reports: &[MetricsReport],
    selectors: &[MetricSelector],
    gate: usize,
) -> Result<String, ReportError> {
    heatmap_csv(&build_heatmap(reports, selectors, gate)?)
}
