use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ReportFormat;
use crate::error::{Error, Result};
use crate::metrics::ScoreRow;

pub const BASELINE_METHOD: &str = "zs";

/// Everything that identifies a run and is reproducible from its config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub model: String,
    pub conversion_model: String,
    pub sample_size: usize,
    pub repeats: usize,
    pub resample_repeats: bool,
    pub tasks: Vec<String>,
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Error,
}

/// Outcome counts for one (task, method, repeat).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSummary {
    pub task_id: String,
    pub method: String,
    pub repeat_index: usize,
    pub n: usize,
    pub scored: usize,
    pub missed: usize,
    pub errored: usize,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Metrics whose value is mathematically undefined on this sample.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub undefined: Vec<String>,
}

/// Mean of a metric over the repeats that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub task_id: String,
    pub method: String,
    pub metric: String,
    pub value: Option<f64>,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub task_id: String,
    pub method: String,
    pub metric: String,
    pub baseline: f64,
    pub value: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub rows: Vec<ScoreRow>,
    pub cells: Vec<CellSummary>,
    pub summary: Vec<SummaryRow>,
    /// Present only when the zero-shot baseline was run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<DeltaRow>>,
}

/// Correlations keep three decimals; everything else is a percentage.
fn decimals(metric: &str) -> u32 {
    if metric.starts_with("pearson") {
        3
    } else {
        1
    }
}

/// The value in displayed units. Tenths of a percent and thousandths of r
/// are both `value * 1000`.
fn display_units(value: f64) -> i64 {
    (value * 1000.0).round() as i64
}

fn fixed(units: i64, metric: &str) -> String {
    let places = decimals(metric);
    let scale = if places == 3 { 1000 } else { 10 };
    let sign = if units < 0 { "-" } else { "" };
    let a = units.unsigned_abs();
    format!(
        "{sign}{}.{:0width$}",
        a / scale,
        a % scale,
        width = places as usize
    )
}

pub fn format_value(metric: &str, value: f64) -> String {
    fixed(display_units(value), metric)
}

/// `81.6 (+21.9)`: the difference of the displayed values.
pub fn format_with_delta(metric: &str, value: f64, baseline: f64) -> String {
    let v = display_units(value);
    let d = v - display_units(baseline);
    let sign = if d < 0 { "" } else { "+" };
    format!("{} ({sign}{})", fixed(v, metric), fixed(d, metric))
}

impl Report {
    /// Builds summary means and baseline deltas. Row and cell order is kept.
    pub fn assemble(meta: ReportMeta, rows: Vec<ScoreRow>, cells: Vec<CellSummary>) -> Self {
        let mut summary: Vec<SummaryRow> = Vec::new();
        let mut totals: Vec<(f64, usize)> = Vec::new();
        for row in &rows {
            match summary
                .iter()
                .position(|s| s.task_id == row.task_id && s.method == row.method && s.metric == row.metric)
            {
                Some(i) => {
                    totals[i].0 += row.value;
                    totals[i].1 += 1;
                }
                None => {
                    summary.push(SummaryRow {
                        task_id: row.task_id.clone(),
                        method: row.method.clone(),
                        metric: row.metric.clone(),
                        value: None,
                        repeats: 0,
                    });
                    totals.push((row.value, 1));
                }
            }
        }
        for (s, (sum, count)) in summary.iter_mut().zip(&totals) {
            s.value = Some(sum / *count as f64);
            s.repeats = *count;
        }
        // metrics that were undefined in every repeat still get a row
        for cell in &cells {
            for metric in &cell.undefined {
                if !summary
                    .iter()
                    .any(|s| s.task_id == cell.task_id && s.method == cell.method && &s.metric == metric)
                {
                    summary.push(SummaryRow {
                        task_id: cell.task_id.clone(),
                        method: cell.method.clone(),
                        metric: metric.clone(),
                        value: None,
                        repeats: 0,
                    });
                }
            }
        }
        let order = |s: &SummaryRow| {
            (
                meta.tasks.iter().position(|t| *t == s.task_id),
                meta.methods.iter().position(|m| *m == s.method),
            )
        };
        summary.sort_by_key(|s| order(s));

        let deltas = meta.methods.iter().any(|m| m == BASELINE_METHOD).then(|| {
            summary
                .iter()
                .filter(|s| s.method != BASELINE_METHOD)
                .filter_map(|s| {
                    let base = summary.iter().find(|b| {
                        b.method == BASELINE_METHOD && b.task_id == s.task_id && b.metric == s.metric
                    })?;
                    let (value, baseline) = (s.value?, base.value?);
                    Some(DeltaRow {
                        task_id: s.task_id.clone(),
                        method: s.method.clone(),
                        metric: s.metric.clone(),
                        baseline,
                        value,
                        delta: value - baseline,
                    })
                })
                .collect()
        });
        Report {
            meta,
            rows,
            cells,
            summary,
            deltas,
        }
    }

    pub fn has_failures(&self) -> bool {
        self.cells.iter().any(|c| c.status == CellStatus::Error)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["task_id", "method", "metric", "value", "n", "repeat_index"])
            .map_err(|e| Error::Config(e.to_string()))?;
        for r in &self.rows {
            w.write_record([
                r.task_id.clone(),
                r.method.clone(),
                r.metric.clone(),
                r.value.to_string(),
                r.n.to_string(),
                r.repeat_index.to_string(),
            ])
            .map_err(|e| Error::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// One table per task: methods as rows, metrics as columns.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Results\n");
        let _ = writeln!(
            out,
            "\nModel `{}`, seed {}, {} instance(s) x {} repeat(s).",
            self.meta.model, self.meta.seed, self.meta.sample_size, self.meta.repeats
        );
        for task in &self.meta.tasks {
            let rows: Vec<&SummaryRow> = self.summary.iter().filter(|s| &s.task_id == task).collect();
            let cells: Vec<&CellSummary> = self.cells.iter().filter(|c| &c.task_id == task).collect();
            if rows.is_empty() && cells.is_empty() {
                continue;
            }
            let mut metrics: Vec<&str> = Vec::new();
            for r in &rows {
                if !metrics.contains(&r.metric.as_str()) {
                    metrics.push(&r.metric);
                }
            }
            let _ = writeln!(out, "\n## {task}\n");
            let _ = writeln!(out, "| method | {} | missed | errored |", metrics.join(" | "));
            let _ = writeln!(out, "|---|{}---|---|", "---|".repeat(metrics.len()));
            for method in &self.meta.methods {
                let method_cells: Vec<&&CellSummary> = cells.iter().filter(|c| &c.method == method).collect();
                if method_cells.is_empty() {
                    continue;
                }
                let all_failed = method_cells.iter().all(|c| c.status == CellStatus::Error);
                let mut line = format!("| {method} |");
                for metric in &metrics {
                    let value = rows
                        .iter()
                        .find(|r| &r.method == method && r.metric == *metric)
                        .and_then(|r| r.value);
                    let text = match value {
                        _ if all_failed => "error".to_string(),
                        None => "n/a".to_string(),
                        Some(v) => match self.baseline(task, metric) {
                            Some(b) if method != BASELINE_METHOD => format_with_delta(metric, v, b),
                            _ => format_value(metric, v),
                        },
                    };
                    let _ = write!(line, " {text} |");
                }
                let missed: usize = method_cells.iter().map(|c| c.missed).sum();
                let errored: usize = method_cells.iter().map(|c| c.errored).sum();
                let _ = writeln!(out, "{line} {missed} | {errored} |");
            }
        }
        let failures: Vec<&CellSummary> = self.cells.iter().filter(|c| c.status == CellStatus::Error).collect();
        if !failures.is_empty() {
            let _ = writeln!(out, "\n## Failed cells\n");
            for c in failures {
                let _ = writeln!(
                    out,
                    "- {} / {} / repeat {}: {}",
                    c.task_id,
                    c.method,
                    c.repeat_index,
                    c.error.as_deref().unwrap_or("unknown error")
                );
            }
        }
        out
    }

    fn baseline(&self, task: &str, metric: &str) -> Option<f64> {
        self.deltas.as_ref()?;
        self.summary
            .iter()
            .find(|s| s.task_id == task && s.method == BASELINE_METHOD && s.metric == metric)
            .and_then(|s| s.value)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => Ok(self.to_markdown()),
        }
    }
}

pub fn emit_report(report: &Report, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = report.render(format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
