//! Front end for the grid scheduling simulator: validation, single runs and
//! sweeps that compare scheduler variants.

pub mod error;
pub mod output;
pub mod scenario_file;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use diana_core::{
    compute_metrics, exec_time_vs_job_count, series, EventKind, EventLog, MetricsSummary, Scenario, SchedulerKind,
    SeriesKind, SeriesTable,
};

pub use error::CliError;
use output::Bundle;
pub use scenario_file::{Sweep, Variant};

pub const LOCAL_VS_MIGRATED: &str = "local_vs_migrated_over_time";
pub const EXEC_TIME_VS_JOBS: &str = "exec_time_vs_job_count";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
    Verbose,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub formats: BTreeSet<Format>,
    pub sweep: Vec<Sweep>,
    pub seed: Option<u64>,
    pub overwrite: bool,
    pub verbosity: Verbosity,
    /// Width of a time bucket in the local/migrated series; defaults to the
    /// scenario's estimate window.
    pub bucket: Option<f64>,
    /// Job-count step of the per-run execution-time series.
    pub job_step: usize,
}

impl RunConfig {
    pub fn new(scenario: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        Self {
            scenario: scenario.into(),
            out: out.into(),
            formats: BTreeSet::from([Format::Csv]),
            sweep: Vec::new(),
            seed: None,
            overwrite: false,
            verbosity: Verbosity::Normal,
            bucket: None,
            job_step: 10,
        }
    }
}

/// What a command produced: text for the terminal and the files written.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub table: String,
    /// Warning events from the simulations.
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// `Ok(())` for a valid scenario; every violation otherwise.
pub fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let scenario = scenario_file::load(path)?;
    scenario.validate().map_err(|errors| CliError::Invalid { variant: None, errors })
}

struct Outcome {
    label: String,
    settings: Vec<(String, String)>,
    scenario: Scenario,
    digest: String,
    log: EventLog,
    summary: MetricsSummary,
    series: BTreeMap<String, SeriesTable>,
}

fn simulate(variant: Variant, bucket: Option<f64>, job_step: usize) -> Result<Outcome, CliError> {
    let Variant {
        label,
        settings,
        scenario,
    } = variant;
    let tag = Some(label.clone());
    scenario.validate().map_err(|errors| CliError::Invalid {
        variant: tag.clone(),
        errors,
    })?;
    let log = diana_core::run(&scenario).map_err(|source| CliError::Simulation {
        variant: tag.clone(),
        source,
    })?;
    let metrics_err = |source| CliError::Metrics {
        variant: tag.clone(),
        source,
    };
    let summary = compute_metrics(&log).map_err(metrics_err)?;
    let bucket = bucket.unwrap_or(scenario.estimate_window);
    let over_time = series(&log, SeriesKind::LocalVsMigratedOverTime, bucket).map_err(metrics_err)?;
    let by_jobs = series(&log, SeriesKind::ExecTimeVsJobCount, job_step.max(1) as f64).map_err(metrics_err)?;
    let series = BTreeMap::from([(LOCAL_VS_MIGRATED.to_string(), over_time), (EXEC_TIME_VS_JOBS.to_string(), by_jobs)]);
    Ok(Outcome {
        label,
        settings,
        digest: scenario_file::digest(&scenario),
        scenario,
        log,
        summary,
        series,
    })
}

/// Runs every variant on a small worker pool; results come back in input order.
fn simulate_all(variants: Vec<Variant>, bucket: Option<f64>, job_step: usize) -> Result<Vec<Outcome>, CliError> {
    let n = variants.len();
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n).max(1);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Variant>>> = variants.into_iter().map(|v| Mutex::new(Some(v))).collect();
    let results: Vec<Mutex<Option<Result<Outcome, CliError>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let variant = slots[i].lock().unwrap().take().expect("each slot taken once");
                *results[i].lock().unwrap() = Some(simulate(variant, bucket, job_step));
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.into_inner().unwrap().expect("every variant ran"))
        .collect()
}

fn stage_run(bundle: &mut Bundle, dir: &Path, o: &Outcome, formats: &BTreeSet<Format>) {
    if formats.contains(&Format::Csv) {
        bundle.add(dir.join("events.csv"), output::events_csv(&o.log));
        bundle.add(dir.join("summary.csv"), output::summary_csv(&o.summary));
        for (name, table) in &o.series {
            bundle.add(dir.join(format!("{name}.csv")), output::series_csv(table));
        }
    }
    if formats.contains(&Format::Json) {
        bundle.add(dir.join("events.json"), output::events_json(&o.digest, &o.log));
        bundle.add(
            dir.join("summary.json"),
            output::report_json(&o.digest, &o.summary, &o.series),
        );
    }
}

fn warnings(o: &Outcome) -> Vec<String> {
    o.log
        .of_kind(EventKind::Warning)
        .map(|e| format!("{}warning at t={}: {}", label_prefix(o), e.time, e.detail()))
        .collect()
}

fn label_prefix(o: &Outcome) -> String {
    if o.settings.is_empty() {
        String::new()
    } else {
        format!("[{}] ", o.label)
    }
}

fn render_summary(m: &MetricsSummary) -> String {
    let fields = output::summary_fields(m);
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    fields.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn single_variant(config: &RunConfig) -> Result<Variant, CliError> {
    let mut scenario = scenario_file::load(&config.scenario)?;
    if let Some(seed) = config.seed {
        scenario.seed = seed;
    }
    Ok(Variant {
        label: "base".into(),
        settings: Vec::new(),
        scenario,
    })
}

/// One simulation; writes the event log, summary and both series under `config.out`.
pub fn cmd_run(config: &RunConfig) -> Result<Report, CliError> {
    if !config.sweep.is_empty() {
        return Err(CliError::Usage("--sweep belongs to `compare`".into()));
    }
    let variant = single_variant(config)?;
    let outcome = simulate(variant, config.bucket, config.job_step)?;
    let mut bundle = Bundle::default();
    stage_run(&mut bundle, Path::new(""), &outcome, &config.formats);
    let written = bundle.write(&config.out, config.overwrite)?;
    let notes = vec![format!("{} events, scenario digest {}", outcome.log.len(), outcome.digest)];
    Ok(Report {
        table: render_summary(&outcome.summary),
        warnings: warnings(&outcome),
        notes,
        written,
    })
}

/// Column label of each run in the merged execution-time table.
///
/// Runs of the same configuration at different workload sizes share a
/// column. Falls back to full variant labels when that would put two runs in
/// the same cell.
fn job_count_labels(outcomes: &[Outcome]) -> Vec<String> {
    let grouped: Vec<String> = outcomes
        .iter()
        .map(|o| {
            let parts: Vec<String> = o
                .settings
                .iter()
                .filter(|(path, _)| !path.starts_with("workload."))
                .map(|(_, raw)| raw.clone())
                .collect();
            if parts.is_empty() {
                o.scenario.scheduler_kind.to_string()
            } else {
                parts.join("_")
            }
        })
        .collect();
    let mut cells = BTreeSet::new();
    let clash = outcomes
        .iter()
        .zip(&grouped)
        .any(|(o, g)| !cells.insert((g.clone(), o.summary.submitted)));
    if clash {
        outcomes.iter().map(|o| o.label.clone()).collect()
    } else {
        grouped
    }
}

fn default_sweep() -> Sweep {
    let kinds = [SchedulerKind::Diana, SchedulerKind::GreedyCompute, SchedulerKind::Random];
    let list: Vec<&str> = kinds.iter().map(|k| k.as_str()).collect();
    format!("scheduler_kind={}", list.join(","))
        .parse()
        .expect("built-in sweep parses")
}

/// Runs every sweep variant with the same seed and writes a comparison
/// table, a merged execution-time table and per-run outputs under `runs/`.
///
/// Without `--sweep` the three scheduler kinds are compared.
pub fn cmd_compare(config: &RunConfig) -> Result<Report, CliError> {
    let base = scenario_file::load_table(&config.scenario)?;
    let sweeps = if config.sweep.is_empty() {
        vec![default_sweep()]
    } else {
        config.sweep.clone()
    };
    let variants = scenario_file::expand(&base, &sweeps, config.seed)?;
    // a comparison is identified by all of its variants
    let digests: Vec<String> = variants.iter().map(|v| scenario_file::digest(&v.scenario)).collect();
    let comparison_digest = match digests.as_slice() {
        [one] => one.clone(),
        all => scenario_file::digest_strings(all),
    };
    let outcomes = simulate_all(variants, config.bucket, config.job_step)?;

    let labels = job_count_labels(&outcomes);
    let runs: Vec<(String, &EventLog)> = labels.iter().cloned().zip(outcomes.iter().map(|o| &o.log)).collect();
    let merged = exec_time_vs_job_count(&runs).map_err(|source| CliError::Metrics { variant: None, source })?;

    let mut bundle = Bundle::default();
    let rows: Vec<(String, String, &MetricsSummary)> = outcomes
        .iter()
        .map(|o| (o.label.clone(), o.scenario.scheduler_kind.to_string(), &o.summary))
        .collect();
    if config.formats.contains(&Format::Csv) {
        bundle.add("comparison.csv", output::comparison_csv(&rows));
        bundle.add(format!("{EXEC_TIME_VS_JOBS}.csv"), output::series_csv(&merged));
    }
    if config.formats.contains(&Format::Json) {
        let summaries: BTreeMap<&str, &MetricsSummary> =
            outcomes.iter().map(|o| (o.label.as_str(), &o.summary)).collect();
        let series = BTreeMap::from([(EXEC_TIME_VS_JOBS.to_string(), merged.clone())]);
        bundle.add("comparison.json", output::report_json(&comparison_digest, &summaries, &series));
    }
    for o in &outcomes {
        stage_run(&mut bundle, &Path::new("runs").join(&o.label), o, &config.formats);
    }
    let written = bundle.write(&config.out, config.overwrite)?;

    let notes = outcomes
        .iter()
        .map(|o| format!("{}: {} events, scenario digest {}", o.label, o.log.len(), o.digest))
        .collect();
    Ok(Report {
        table: render_comparison(&rows),
        warnings: outcomes.iter().flat_map(warnings).collect(),
        notes,
        written,
    })
}

fn render_comparison(rows: &[(String, String, &MetricsSummary)]) -> String {
    let header = ["variant", "completed", "mean_turnaround", "mean_waiting", "makespan", "migrated"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|(label, _, m)| {
            [
                label.clone(),
                m.completed.to_string(),
                format!("{:.3}", m.mean_turnaround),
                format!("{:.3}", m.mean_waiting),
                format!("{:.3}", m.makespan),
                m.jobs_migrated.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| body.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| -> String {
        let mut s = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        s.truncate(s.trim_end().len());
        s + "\n"
    };
    let mut out = line(header.to_vec());
    for r in &body {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}
