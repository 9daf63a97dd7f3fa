//! Performance indicators derived from event logs.
//!
//! Per completed job:
//!
//! * turnaround = output delivered − arrival;
//! * waiting = time in ready queues, i.e. stage-in start − first enqueue;
//!   stage-in time itself is excluded;
//! * response = execution start − arrival.
//!
//! Makespan runs from the first arrival to the last output delivery.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::events::{EventKind, EventLog, EventPayload, TransferPhase};
use crate::ids::{JobId, SiteId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("log integrity violated at event {seq}: {reason}")]
    LogIntegrity { seq: u64, reason: String },
    #[error("unknown series kind `{0}` (expected local_vs_migrated_over_time or exec_time_vs_job_count)")]
    UnknownSeries(String),
    #[error("bucket must be finite and > 0")]
    InvalidBucket,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct JobTrace {
    arrival: Option<f64>,
    first_enqueue: Option<f64>,
    stage_in: Option<(f64, Option<f64>)>,
    exec: Option<(f64, Option<f64>)>,
    exec_site: Option<SiteId>,
    processors: u32,
    stage_out: Option<(f64, Option<f64>)>,
    migrated: bool,
}

impl JobTrace {
    fn completion(&self) -> Option<f64> {
        self.stage_out.and_then(|(_, end)| end)
    }
}

struct Replay {
    jobs: BTreeMap<JobId, JobTrace>,
    first_arrival: Option<f64>,
}

fn replay(log: &EventLog) -> Result<Replay, MetricsError> {
    let mut jobs: BTreeMap<JobId, JobTrace> = BTreeMap::new();
    let mut first_arrival: Option<f64> = None;
    let mut last_time = f64::NEG_INFINITY;
    for (i, e) in log.iter().enumerate() {
        let fail = |reason: String| MetricsError::LogIntegrity { seq: e.seq, reason };
        if e.seq != i as u64 {
            return Err(fail(format!("sequence number out of order (expected {i})")));
        }
        if !e.time.is_finite() || e.time < last_time {
            return Err(fail("time goes backwards".into()));
        }
        last_time = e.time;
        let job_id = match e.kind {
            EventKind::Start | EventKind::End => continue,
            EventKind::Warning => match e.job {
                Some(id) => id,
                None => continue,
            },
            _ => e.job.ok_or_else(|| fail(format!("{} without a job", e.kind)))?,
        };
        let t = jobs.entry(job_id).or_default();
        match (e.kind, &e.payload) {
            (EventKind::Arrival, _) => {
                if t.arrival.is_some() {
                    return Err(fail(format!("{job_id} arrived twice")));
                }
                t.arrival = Some(e.time);
                first_arrival = Some(first_arrival.map_or(e.time, |f: f64| f.min(e.time)));
            }
            (EventKind::Placement, _) => {
                if t.arrival.is_none() {
                    return Err(fail(format!("{job_id} placed before arrival")));
                }
            }
            (EventKind::Enqueue, _) => {
                if t.arrival.is_none() {
                    return Err(fail(format!("{job_id} enqueued before arrival")));
                }
                if t.stage_in.is_some() {
                    return Err(fail(format!("{job_id} enqueued after dispatch")));
                }
                t.first_enqueue.get_or_insert(e.time);
            }
            (EventKind::Export, _) => {
                if t.first_enqueue.is_none() || t.stage_in.is_some() {
                    return Err(fail(format!("{job_id} exported while not queued")));
                }
                t.migrated = true;
            }
            (EventKind::Promotion | EventKind::Demotion, _) => {
                if t.first_enqueue.is_none() || t.stage_in.is_some() {
                    return Err(fail(format!("{job_id} changed level while not queued")));
                }
            }
            (EventKind::TransferStart, EventPayload::Transfer { phase, .. }) => match phase {
                TransferPhase::StageIn => {
                    if t.first_enqueue.is_none() || t.stage_in.is_some() {
                        return Err(fail(format!("{job_id} staged in while not queued")));
                    }
                    t.stage_in = Some((e.time, None));
                }
                TransferPhase::StageOut => {
                    if !matches!(t.exec, Some((_, Some(_)))) || t.stage_out.is_some() {
                        return Err(fail(format!("{job_id} staged out before execution ended")));
                    }
                    t.stage_out = Some((e.time, None));
                }
            },
            (EventKind::TransferEnd, EventPayload::Transfer { phase, .. }) => {
                let slot = match phase {
                    TransferPhase::StageIn => &mut t.stage_in,
                    TransferPhase::StageOut => &mut t.stage_out,
                };
                match slot {
                    Some((_, end @ None)) => *end = Some(e.time),
                    _ => return Err(fail(format!("{job_id} ended a transfer it never started"))),
                }
            }
            (EventKind::ExecStart, EventPayload::Exec { processors, .. }) => {
                if !matches!(t.stage_in, Some((_, Some(_)))) || t.exec.is_some() {
                    return Err(fail(format!("{job_id} started before stage-in finished")));
                }
                t.exec = Some((e.time, None));
                t.exec_site = e.site;
                t.processors = *processors;
            }
            (EventKind::ExecEnd, _) => match &mut t.exec {
                Some((start, end @ None)) if e.time > *start => *end = Some(e.time),
                _ => return Err(fail(format!("{job_id} ended execution it never started"))),
            },
            (EventKind::Warning, _) => {}
            (kind, payload) => return Err(fail(format!("{kind} with unexpected payload {payload:?}"))),
        }
    }
    Ok(Replay { jobs, first_arrival })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub submitted: usize,
    pub completed: usize,
    pub makespan: f64,
    pub throughput: f64,
    pub mean_turnaround: f64,
    pub median_turnaround: f64,
    pub p95_turnaround: f64,
    pub mean_waiting: f64,
    pub mean_response: f64,
    pub cpu_utilization: BTreeMap<SiteId, f64>,
    pub jobs_local: usize,
    pub jobs_migrated: usize,
    pub littles_residual: f64,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0,
    }
}

/// Nearest-rank percentile.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn compute_metrics(log: &EventLog) -> Result<MetricsSummary, MetricsError> {
    let replay = replay(log)?;
    let submitted = replay.jobs.values().filter(|t| t.arrival.is_some()).count();
    let Some(t0) = replay.first_arrival else {
        return Ok(MetricsSummary {
            cpu_utilization: log.sites().iter().map(|s| (s.id, 0.0)).collect(),
            ..MetricsSummary::default()
        });
    };

    let mut turnaround = Vec::new();
    let mut waiting = Vec::new();
    let mut response = Vec::new();
    let (mut local, mut migrated) = (0, 0);
    let mut last_completion = t0;
    for t in replay.jobs.values() {
        let Some(done) = t.completion() else { continue };
        let (Some(arrival), Some(enq), Some((si_start, Some(si_end))), Some((ex_start, _))) =
            (t.arrival, t.first_enqueue, t.stage_in, t.exec)
        else {
            continue;
        };
        turnaround.push(done - arrival);
        waiting.push((ex_start - enq) - (si_end - si_start));
        response.push(ex_start - arrival);
        last_completion = last_completion.max(done);
        if t.migrated {
            migrated += 1;
        } else {
            local += 1;
        }
    }
    let completed = turnaround.len();
    let makespan = last_completion - t0;
    let throughput = if makespan > 0.0 { completed as f64 / makespan } else { 0.0 };

    let horizon = t0 + makespan;
    let mut busy: BTreeMap<SiteId, f64> = BTreeMap::new();
    for t in replay.jobs.values() {
        if let (Some((start, Some(end))), Some(site)) = (t.exec, t.exec_site) {
            let span = (end.min(horizon) - start.max(t0)).max(0.0);
            *busy.entry(site).or_default() += span * f64::from(t.processors);
        }
    }
    let cpu_utilization = log
        .sites()
        .iter()
        .map(|s| {
            let capacity = f64::from(s.processors) * makespan;
            let u = if capacity > 0.0 {
                busy.get(&s.id).copied().unwrap_or(0.0) / capacity
            } else {
                0.0
            };
            (s.id, u.clamp(0.0, 1.0))
        })
        .collect();

    let whole = log
        .of_kind(EventKind::Enqueue)
        .last()
        .map_or(0.0, |e| e.time - t0);
    let mut sorted = turnaround.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(MetricsSummary {
        submitted,
        completed,
        makespan,
        throughput,
        mean_turnaround: mean(&turnaround),
        median_turnaround: median(&sorted),
        p95_turnaround: percentile(&sorted, 0.95),
        mean_waiting: mean(&waiting),
        mean_response: mean(&response),
        cpu_utilization,
        jobs_local: local,
        jobs_migrated: migrated,
        littles_residual: littles_residual(log, whole),
    })
}

/// One stay of a job in a site's ready queues.
#[derive(Debug, Clone, Copy)]
struct Visit {
    start: f64,
    end: f64,
}

fn queue_visits(log: &EventLog) -> Vec<Visit> {
    let end_of_log = log.events.last().map_or(0.0, |e| e.time);
    let mut open: BTreeMap<JobId, f64> = BTreeMap::new();
    let mut visits = Vec::new();
    for e in log {
        let Some(job) = e.job else { continue };
        match (e.kind, &e.payload) {
            (EventKind::Enqueue, _) => {
                open.insert(job, e.time);
            }
            (EventKind::Export, _)
            | (
                EventKind::TransferStart,
                EventPayload::Transfer {
                    phase: TransferPhase::StageIn,
                    ..
                },
            ) => {
                if let Some(start) = open.remove(&job) {
                    visits.push(Visit { start, end: e.time });
                }
            }
            _ => {}
        }
    }
    visits.extend(open.into_values().map(|start| Visit { start, end: end_of_log }));
    visits
}

/// `|N − R·W| / max(N, 1)` over the `window` seconds ending at the last enqueue.
///
/// `N` is the time-averaged number of waiting jobs, `R` the rate of queue
/// entries and `W` the mean stay of entries made inside the window.
pub fn littles_residual(log: &EventLog, window: f64) -> f64 {
    if !(window.is_finite() && window > 0.0) {
        return 0.0;
    }
    let Some(b) = log.of_kind(EventKind::Enqueue).last().map(|e| e.time) else {
        return 0.0;
    };
    let a = b - window;
    let visits = queue_visits(log);
    let area: f64 = visits
        .iter()
        .map(|v| (v.end.min(b) - v.start.max(a)).max(0.0))
        .sum();
    let entered: Vec<f64> = visits
        .iter()
        .filter(|v| v.start >= a && v.start < b)
        .map(|v| v.end - v.start)
        .collect();
    if entered.is_empty() {
        return 0.0;
    }
    let n = area / window;
    let r = entered.len() as f64 / window;
    let w = mean(&entered);
    (n - r * w).abs() / n.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Cumulative local and migrated completions per time bucket.
    LocalVsMigratedOverTime,
    /// Mean turnaround and makespan against submitted-job count.
    ExecTimeVsJobCount,
}

impl FromStr for SeriesKind {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local_vs_migrated_over_time" => Ok(SeriesKind::LocalVsMigratedOverTime),
            "exec_time_vs_job_count" => Ok(SeriesKind::ExecTimeVsJobCount),
            other => Err(MetricsError::UnknownSeries(other.to_string())),
        }
    }
}

/// Plot-ready table.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SeriesTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// `bucket` is seconds for the time series and a job-count step otherwise.
pub fn series(log: &EventLog, kind: SeriesKind, bucket: f64) -> Result<SeriesTable, MetricsError> {
    if !(bucket.is_finite() && bucket > 0.0) {
        return Err(MetricsError::InvalidBucket);
    }
    let replay = replay(log)?;
    match kind {
        SeriesKind::LocalVsMigratedOverTime => {
            let mut table = SeriesTable {
                columns: vec!["time".into(), "local".into(), "migrated".into()],
                rows: Vec::new(),
            };
            let Some(t0) = replay.first_arrival else { return Ok(table) };
            let mut done: Vec<(f64, bool)> = replay
                .jobs
                .values()
                .filter_map(|t| t.completion().map(|c| (c, t.migrated)))
                .collect();
            done.sort_by(|a, b| a.0.total_cmp(&b.0));
            let last = done.last().map_or(t0, |d| d.0);
            let buckets = (((last - t0) / bucket).ceil() as usize).max(1);
            let (mut local, mut migrated, mut i) = (0u64, 0u64, 0);
            for k in 1..=buckets {
                let edge = t0 + k as f64 * bucket;
                while i < done.len() && done[i].0 <= edge {
                    if done[i].1 {
                        migrated += 1;
                    } else {
                        local += 1;
                    }
                    i += 1;
                }
                table.rows.push(vec![edge, local as f64, migrated as f64]);
            }
            Ok(table)
        }
        SeriesKind::ExecTimeVsJobCount => {
            let mut table = SeriesTable {
                columns: vec!["jobs".into(), "mean_turnaround".into(), "makespan".into()],
                rows: Vec::new(),
            };
            let mut by_arrival: Vec<(f64, JobId, &JobTrace)> = replay
                .jobs
                .iter()
                .filter_map(|(id, t)| t.arrival.map(|a| (a, *id, t)))
                .collect();
            by_arrival.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let n = by_arrival.len();
            let step = (bucket.round() as usize).max(1);
            let mut marks: Vec<usize> = (1..).map(|k| k * step).take_while(|&m| m <= n).collect();
            if marks.last() != Some(&n) && n > 0 {
                marks.push(n);
            }
            for m in marks {
                let prefix = &by_arrival[..m];
                let t0 = prefix[0].0;
                let turnarounds: Vec<f64> = prefix
                    .iter()
                    .filter_map(|(a, _, t)| t.completion().map(|c| c - a))
                    .collect();
                let makespan = prefix
                    .iter()
                    .filter_map(|(_, _, t)| t.completion())
                    .fold(t0, f64::max)
                    - t0;
                table.rows.push(vec![m as f64, mean(&turnarounds), makespan]);
            }
            Ok(table)
        }
    }
}

/// Fig.-5-style table over several runs: one row per submitted-job count and
/// a `mean_turnaround` / `makespan` column pair per label.
pub fn exec_time_vs_job_count(runs: &[(String, &EventLog)]) -> Result<SeriesTable, MetricsError> {
    let mut labels: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<usize, BTreeMap<&str, (f64, f64)>> = BTreeMap::new();
    for (label, log) in runs {
        let m = compute_metrics(log)?;
        if !labels.contains(&label.as_str()) {
            labels.push(label);
        }
        cells
            .entry(m.submitted)
            .or_default()
            .insert(label, (m.mean_turnaround, m.makespan));
    }
    let mut columns = vec!["jobs".to_string()];
    for l in &labels {
        columns.push(format!("{l}_mean_turnaround"));
        columns.push(format!("{l}_makespan"));
    }
    let rows = cells
        .into_iter()
        .map(|(jobs, by_label)| {
            let mut row = vec![jobs as f64];
            for l in &labels {
                let (t, m) = by_label.get(l).copied().unwrap_or((f64::NAN, f64::NAN));
                row.push(t);
                row.push(m);
            }
            row
        })
        .collect();
    Ok(SeriesTable { columns, rows })
}

/// Job ids that appear in more than one export event.
pub fn repeated_exports(log: &EventLog) -> Vec<JobId> {
    let mut counts: BTreeMap<JobId, usize> = BTreeMap::new();
    for e in log.of_kind(EventKind::Export) {
        if let Some(j) = e.job {
            *counts.entry(j).or_default() += 1;
        }
    }
    counts.into_iter().filter(|(_, c)| *c > 1).map(|(j, _)| j).collect()
}

/// Per job: first enqueue to stage-in start.
pub fn waits(log: &EventLog) -> Result<BTreeMap<JobId, f64>, MetricsError> {
    Ok(replay(log)?
        .jobs
        .into_iter()
        .filter_map(|(id, t)| match (t.first_enqueue, t.stage_in) {
            (Some(enq), Some((start, _))) => Some((id, start - enq)),
            _ => None,
        })
        .collect())
}
