//! CSV and JSON renderings of logs, summaries and series.
//!
//! CSV: comma separated, header row, `.` decimals, LF line endings. Missing
//! values (NaN) are empty cells.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use diana_core::{EventLog, MetricsSummary, SeriesTable};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v == 0.0 {
        "0".to_string()
    } else {
        v.to_string()
    }
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn events_csv(log: &EventLog) -> Vec<u8> {
    let header: Vec<String> = ["seq", "time", "kind", "job", "site", "detail"].map(String::from).into();
    csv_bytes(
        &header,
        log.iter().map(|e| {
            vec![
                e.seq.to_string(),
                num(e.time),
                e.kind.as_str().to_string(),
                e.job.map(|j| j.0.to_string()).unwrap_or_default(),
                e.site.map(|s| s.0.to_string()).unwrap_or_default(),
                e.detail(),
            ]
        }),
    )
}

/// Flat `(name, value)` pairs; utilization is one column per site.
pub fn summary_fields(m: &MetricsSummary) -> Vec<(String, String)> {
    let mut f = vec![
        ("submitted".to_string(), m.submitted.to_string()),
        ("completed".into(), m.completed.to_string()),
        ("makespan".into(), num(m.makespan)),
        ("throughput".into(), num(m.throughput)),
        ("mean_turnaround".into(), num(m.mean_turnaround)),
        ("median_turnaround".into(), num(m.median_turnaround)),
        ("p95_turnaround".into(), num(m.p95_turnaround)),
        ("mean_waiting".into(), num(m.mean_waiting)),
        ("mean_response".into(), num(m.mean_response)),
        ("jobs_local".into(), m.jobs_local.to_string()),
        ("jobs_migrated".into(), m.jobs_migrated.to_string()),
        ("littles_residual".into(), num(m.littles_residual)),
    ];
    for (site, u) in &m.cpu_utilization {
        f.push((format!("cpu_utilization_site{}", site.0), num(*u)));
    }
    f
}

pub fn summary_csv(m: &MetricsSummary) -> Vec<u8> {
    let (header, row): (Vec<String>, Vec<String>) = summary_fields(m).into_iter().unzip();
    csv_bytes(&header, [row])
}

/// One row per labelled run; site columns are the union over runs.
pub fn comparison_csv(runs: &[(String, String, &MetricsSummary)]) -> Vec<u8> {
    let mut header = vec!["variant".to_string(), "scheduler_kind".to_string()];
    let mut columns: Vec<String> = Vec::new();
    for (_, _, m) in runs {
        for (name, _) in summary_fields(m) {
            if !columns.contains(&name) {
                columns.push(name);
            }
        }
    }
    header.extend(columns.iter().cloned());
    let rows = runs.iter().map(|(label, kind, m)| {
        let fields: BTreeMap<String, String> = summary_fields(m).into_iter().collect();
        let mut row = vec![label.clone(), kind.clone()];
        row.extend(columns.iter().map(|c| fields.get(c).cloned().unwrap_or_default()));
        row
    });
    csv_bytes(&header, rows)
}

pub fn series_csv(t: &SeriesTable) -> Vec<u8> {
    csv_bytes(&t.columns, t.rows.iter().map(|r| r.iter().map(|v| num(*v)).collect()))
}

fn pretty(value: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("json serializes");
    out.push(b'\n');
    out
}

/// `{scenario_digest, summary, series}`.
pub fn report_json(digest: &str, summary: &impl Serialize, series: &BTreeMap<String, SeriesTable>) -> Vec<u8> {
    pretty(&json!({
        "scenario_digest": digest,
        "summary": summary,
        "series": series,
    }))
}

pub fn events_json(digest: &str, log: &EventLog) -> Vec<u8> {
    pretty(&json!({
        "scenario_digest": digest,
        "events": log.events,
    }))
}

/// Files staged in memory and written together.
#[derive(Debug, Default)]
pub struct Bundle {
    pub files: Vec<(PathBuf, Vec<u8>)>,
}

impl Bundle {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    /// Refuses to touch anything if any target exists and `overwrite` is off.
    pub fn write(&self, root: &Path, overwrite: bool) -> Result<Vec<PathBuf>, CliError> {
        let targets: Vec<PathBuf> = self.files.iter().map(|(p, _)| root.join(p)).collect();
        if !overwrite {
            if let Some(p) = targets.iter().find(|p| p.exists()) {
                return Err(CliError::Exists { path: p.clone() });
            }
        }
        for (target, (_, bytes)) in targets.iter().zip(&self.files) {
            if let Some(dir) = target.parent() {
                fs::create_dir_all(dir).map_err(CliError::io(dir))?;
            }
            fs::write(target, bytes).map_err(CliError::io(target))?;
        }
        Ok(targets)
    }
}
