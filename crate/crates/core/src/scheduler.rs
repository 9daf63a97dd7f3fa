//! Site selection, overload detection and job export.
//!
//! A burst is placed as a unit at the site minimising the summed total cost
//! of its jobs. A site whose measured arrival rate exceeds its service
//! capacity (or whose queue passes a length guard) exports jobs, one hop
//! only, to remote sites that price them strictly cheaper than staying.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{compute_cost, total_cost, CostBreakdown, CostError, CostWeights, JobDataSpec, SiteState, Topology};
use crate::events::{EventKind, EventLog, EventPayload, TransferPhase};
use crate::ids::{BurstId, JobId, SiteId};
use crate::queues::Job;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedulerError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("burst is empty")]
    EmptyBurst,
    #[error("no site can run {burst} (needs {processors} processors)")]
    NoRunnableSite { burst: BurstId, processors: u32 },
    #[error("Little's formula undefined: {0}")]
    UndefinedEstimate(&'static str),
}

/// Placement policy for new bursts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    /// Minimum total cost (network + compute + data transfer).
    #[default]
    Diana,
    /// Minimum compute cost only, ignoring data location.
    GreedyCompute,
    /// Uniform over runnable sites.
    Random,
}

impl SchedulerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Diana => "diana",
            SchedulerKind::GreedyCompute => "greedy-compute",
            SchedulerKind::Random => "random",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diana" => Ok(SchedulerKind::Diana),
            "greedy-compute" => Ok(SchedulerKind::GreedyCompute),
            "random" => Ok(SchedulerKind::Random),
            other => Err(format!("unknown scheduler kind `{other}`")),
        }
    }
}

/// Snapshot of the grid a decision is made against.
#[derive(Debug, Clone, PartialEq)]
pub struct GridView {
    pub sites: Vec<SiteState>,
    pub topology: Topology,
    pub weights: CostWeights,
}

impl GridView {
    pub fn new(mut sites: Vec<SiteState>, topology: Topology, weights: CostWeights) -> Self {
        sites.sort_by_key(|s| s.id);
        Self {
            sites,
            topology,
            weights,
        }
    }

    pub fn site(&self, id: SiteId) -> Option<&SiteState> {
        self.sites.iter().find(|s| s.id == id)
    }

    pub fn site_mut(&mut self, id: SiteId) -> Option<&mut SiteState> {
        self.sites.iter_mut().find(|s| s.id == id)
    }

    /// Sites with enough processors for every job of `jobs`, ascending by id.
    pub fn runnable<'a>(&'a self, jobs: &'a [Job]) -> impl Iterator<Item = &'a SiteState> + 'a {
        let needed = jobs.iter().map(|j| j.processors_required).max().unwrap_or(0);
        self.sites.iter().filter(move |s| s.processors >= needed)
    }
}

/// The job's data as seen from `site`: a hosted dataset is read locally.
pub fn localized<'a>(job: &'a Job, site: &SiteState) -> Cow<'a, JobDataSpec> {
    match job.dataset {
        Some(ds) if site.hosts(ds) && job.data.input_source != site.id => Cow::Owned(JobDataSpec {
            input_source: site.id,
            ..job.data.clone()
        }),
        _ => Cow::Borrowed(&job.data),
    }
}

pub fn job_cost(job: &Job, site: &SiteState, view: &GridView) -> Result<CostBreakdown, CostError> {
    total_cost(&localized(job, site), site, &view.topology, &view.weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub burst: BurstId,
    pub site: SiteId,
    pub cost: CostBreakdown,
    pub per_candidate: BTreeMap<SiteId, CostBreakdown>,
}

fn burst_costs(burst: &[Job], view: &GridView) -> Result<BTreeMap<SiteId, CostBreakdown>, SchedulerError> {
    let first = burst.first().ok_or(SchedulerError::EmptyBurst)?;
    let mut per_candidate = BTreeMap::new();
    for site in view.runnable(burst) {
        let mut sum = CostBreakdown::default();
        for job in burst {
            sum.accumulate(&job_cost(job, site, view)?);
        }
        per_candidate.insert(site.id, sum);
    }
    if per_candidate.is_empty() {
        return Err(SchedulerError::NoRunnableSite {
            burst: first.burst,
            processors: burst.iter().map(|j| j.processors_required).max().unwrap_or(0),
        });
    }
    Ok(per_candidate)
}

/// First entry (lowest id) attaining the minimum of `key`.
fn argmin<K: Copy, V>(items: impl IntoIterator<Item = (K, V)>, key: impl Fn(&V) -> f64) -> Option<(K, V)> {
    let mut best: Option<(K, V)> = None;
    for (k, v) in items {
        if best.as_ref().is_none_or(|(_, b)| key(&v) < key(b)) {
            best = Some((k, v));
        }
    }
    best
}

/// Places the whole burst at the candidate with minimum summed total cost.
pub fn select_site(burst: &[Job], view: &GridView) -> Result<Placement, SchedulerError> {
    let per_candidate = burst_costs(burst, view)?;
    let (site, cost) = argmin(per_candidate.iter().map(|(k, v)| (*k, *v)), |c| c.total).expect("non-empty");
    Ok(Placement {
        burst: burst[0].burst,
        site,
        cost,
        per_candidate,
    })
}

/// Baseline: minimum compute cost, data location ignored.
pub fn select_site_greedy(burst: &[Job], view: &GridView) -> Result<Placement, SchedulerError> {
    let per_candidate = burst_costs(burst, view)?;
    let mut compute = Vec::with_capacity(per_candidate.len());
    for id in per_candidate.keys() {
        let site = view.site(*id).expect("candidate comes from view");
        compute.push((*id, compute_cost(site, &view.weights)?));
    }
    let (site, _) = argmin(compute, |c| *c).expect("non-empty");
    Ok(Placement {
        burst: burst[0].burst,
        site,
        cost: per_candidate[&site],
        per_candidate,
    })
}

/// Baseline: uniform choice among runnable sites.
pub fn select_site_random<R: Rng + ?Sized>(
    burst: &[Job],
    view: &GridView,
    rng: &mut R,
) -> Result<Placement, SchedulerError> {
    let per_candidate = burst_costs(burst, view)?;
    let idx = rng.random_range(0..per_candidate.len());
    let (&site, &cost) = per_candidate.iter().nth(idx).expect("index in range");
    Ok(Placement {
        burst: burst[0].burst,
        site,
        cost,
        per_candidate,
    })
}

pub fn place_burst<R: Rng + ?Sized>(
    kind: SchedulerKind,
    burst: &[Job],
    view: &GridView,
    rng: &mut R,
) -> Result<Placement, SchedulerError> {
    match kind {
        SchedulerKind::Diana => select_site(burst, view),
        SchedulerKind::GreedyCompute => select_site_greedy(burst, view),
        SchedulerKind::Random => select_site_random(burst, view, rng),
    }
}

/// Two known quantities of `N = R·W`; the third is solved for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LittleQuery {
    QueueLength { arrival_rate: f64, wait: f64 },
    ArrivalRate { queue_length: f64, wait: f64 },
    Wait { queue_length: f64, arrival_rate: f64 },
}

pub fn littles_formula(query: LittleQuery) -> Result<f64, SchedulerError> {
    let check = |v: f64| {
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(SchedulerError::UndefinedEstimate("inputs must be finite and non-negative"))
        }
    };
    match query {
        LittleQuery::QueueLength { arrival_rate, wait } => Ok(check(arrival_rate)? * check(wait)?),
        LittleQuery::ArrivalRate { queue_length, wait } => {
            let (n, w) = (check(queue_length)?, check(wait)?);
            if w == 0.0 {
                return Err(SchedulerError::UndefinedEstimate("wait is zero"));
            }
            Ok(n / w)
        }
        LittleQuery::Wait {
            queue_length,
            arrival_rate,
        } => {
            let (n, r) = (check(queue_length)?, check(arrival_rate)?);
            if r == 0.0 {
                return Err(SchedulerError::UndefinedEstimate("arrival rate is zero"));
            }
            Ok(n / r)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LittleEstimate {
    /// Jobs/s entering the site's queues.
    pub arrival_rate: f64,
    /// Mean seconds in queue of jobs that started service.
    pub avg_wait: f64,
    /// `arrival_rate · avg_wait`.
    pub predicted_queue: f64,
    /// Jobs/s the site can start, from observed processor-seconds per job.
    pub service_capacity: f64,
}

impl LittleEstimate {
    pub fn new(arrival_rate: f64, avg_wait: f64, service_capacity: f64) -> Self {
        Self {
            arrival_rate,
            avg_wait,
            predicted_queue: arrival_rate * avg_wait,
            service_capacity,
        }
    }
}

/// Estimates the site's queueing behaviour over `[now - window, now]`.
///
/// Service capacity is `processors / mean(service_time · processors)` over
/// executions started in the window; with none, the most recent execution
/// before the window is used, and with no history at all capacity is
/// unbounded.
pub fn estimate_arrivals(log: &EventLog, site: &SiteState, now: f64, window: f64) -> LittleEstimate {
    let events = log.between(now - window, now);
    let mut arrivals = 0usize;
    let (mut wait_sum, mut waits) = (0.0, 0usize);
    let (mut work_sum, mut execs) = (0.0, 0usize);
    for e in events.iter().filter(|e| e.site == Some(site.id)) {
        match (&e.kind, &e.payload) {
            (EventKind::Enqueue, _) => arrivals += 1,
            (
                EventKind::TransferStart,
                EventPayload::Transfer {
                    phase: TransferPhase::StageIn,
                    queue_wait,
                    ..
                },
            ) => {
                wait_sum += queue_wait;
                waits += 1;
            }
            (
                EventKind::ExecStart,
                EventPayload::Exec {
                    service_time,
                    processors,
                },
            ) => {
                work_sum += service_time * f64::from(*processors);
                execs += 1;
            }
            _ => {}
        }
    }
    if execs == 0 {
        let start = log.events.partition_point(|e| e.time < now - window);
        let previous = log.events[..start].iter().rev().find_map(|e| match (&e.kind, &e.payload) {
            (
                EventKind::ExecStart,
                EventPayload::Exec {
                    service_time,
                    processors,
                },
            ) if e.site == Some(site.id) => Some(service_time * f64::from(*processors)),
            _ => None,
        });
        if let Some(work) = previous {
            work_sum = work;
            execs = 1;
        }
    }
    let arrival_rate = if window > 0.0 { arrivals as f64 / window } else { 0.0 };
    let avg_wait = if waits > 0 { wait_sum / waits as f64 } else { 0.0 };
    let service_capacity = if execs > 0 && work_sum > 0.0 {
        f64::from(site.processors) / (work_sum / execs as f64)
    } else {
        f64::INFINITY
    };
    LittleEstimate::new(arrival_rate, avg_wait, service_capacity)
}

pub const DEFAULT_OVERLOAD_FACTOR: f64 = 5.0;

/// Overloaded when arrivals outpace service or the queue passes
/// `processors · overload_factor`.
pub fn should_export(site: &SiteState, est: &LittleEstimate, overload_factor: f64) -> bool {
    est.arrival_rate > est.service_capacity
        || site.queue_length as f64 > f64::from(site.processors) * overload_factor
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Export {
    pub job: JobId,
    pub to: SiteId,
    pub local_cost: f64,
    pub remote_cost: f64,
}

/// Assigns each remigratable job to its cheapest remote site, if that beats
/// staying at `from`. Queue lengths in the working view follow each move.
/// Exported jobs have `remigratable` cleared.
pub fn export_jobs(jobs: &mut [Job], from: SiteId, view: &GridView) -> Result<Vec<Export>, SchedulerError> {
    let mut view = Cow::Borrowed(view);
    let mut exports = Vec::new();
    for job in jobs.iter_mut().filter(|j| j.remigratable) {
        let Some(local) = view.site(from) else { break };
        let local_cost = job_cost(job, local, &view)?.total;
        let mut remote = Vec::new();
        for site in view
            .sites
            .iter()
            .filter(|s| s.id != from && s.processors >= job.processors_required)
        {
            remote.push((site.id, job_cost(job, site, &view)?.total));
        }
        let Some((to, remote_cost)) = argmin(remote, |c| *c) else {
            continue;
        };
        if remote_cost < local_cost {
            job.remigratable = false;
            exports.push(Export {
                job: job.id,
                to,
                local_cost,
                remote_cost,
            });
            let v = view.to_mut();
            if let Some(s) = v.site_mut(from) {
                s.queue_length = s.queue_length.saturating_sub(1);
            }
            if let Some(s) = v.site_mut(to) {
                s.queue_length += 1;
            }
        }
    }
    Ok(exports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::NetworkLink;
    use crate::ids::{DatasetId, UserId};

    fn s(i: u32) -> SiteId {
        SiteId(i)
    }

    fn full_mesh(n: u32, bandwidth: f64) -> Topology {
        let mut t = Topology::default();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    t.insert(NetworkLink::new(s(a), s(b), bandwidth, 1e-3, 0.05));
                }
            }
        }
        t
    }

    fn job(id: u64, data: JobDataSpec) -> Job {
        Job::new(JobId(id), UserId(0), BurstId(0), 1, 10.0, data)
    }

    #[test]
    fn littles_formula_solves_each_unknown() {
        assert_eq!(
            littles_formula(LittleQuery::QueueLength { arrival_rate: 2.0, wait: 5.0 }),
            Ok(10.0)
        );
        assert_eq!(
            littles_formula(LittleQuery::ArrivalRate { queue_length: 10.0, wait: 5.0 }),
            Ok(2.0)
        );
        assert_eq!(
            littles_formula(LittleQuery::Wait {
                queue_length: 12.0,
                arrival_rate: 3.0
            }),
            Ok(4.0)
        );
        assert!(littles_formula(LittleQuery::Wait {
            queue_length: 12.0,
            arrival_rate: 0.0
        })
        .is_err());
        assert!(littles_formula(LittleQuery::ArrivalRate { queue_length: 1.0, wait: 0.0 }).is_err());
        assert!(littles_formula(LittleQuery::QueueLength {
            arrival_rate: f64::NAN,
            wait: 1.0
        })
        .is_err());
    }

    #[test]
    fn single_site_always_chosen() {
        let mut site = SiteState::new(s(4), 1.0, 1);
        site.queue_length = 1000;
        let view = GridView::new(vec![site], Topology::default(), CostWeights::default());
        let p = select_site(&[job(0, JobDataSpec::local(s(4)))], &view).unwrap();
        assert_eq!(p.site, s(4));
        assert_eq!(p.cost, p.per_candidate[&s(4)]);
    }

    #[test]
    fn hosted_data_wins_between_identical_sites() {
        let mut a = SiteState::new(s(0), 10.0, 4);
        a.hosted_data.insert(DatasetId(7));
        let b = SiteState::new(s(1), 10.0, 4);
        let view = GridView::new(vec![b, a], full_mesh(2, 1e8), CostWeights::default());
        let data = JobDataSpec {
            input_bytes: 1e9,
            ..JobDataSpec::local(s(0))
        };
        let burst = vec![job(0, data).with_dataset(DatasetId(7))];
        let p = select_site(&burst, &view).unwrap();
        assert_eq!(p.site, s(0));
        assert!(p.per_candidate[&s(1)].total > p.per_candidate[&s(0)].total);
    }

    #[test]
    fn ties_go_to_lowest_site_id() {
        let view = GridView::new(
            vec![SiteState::new(s(2), 1.0, 1), SiteState::new(s(1), 1.0, 1)],
            full_mesh(3, 1e8),
            CostWeights::default(),
        );
        let data = JobDataSpec::local(s(0));
        let p = select_site(&[job(0, data)], &view).unwrap();
        assert_eq!(p.site, s(1));
    }

    #[test]
    fn sites_without_enough_processors_excluded() {
        let view = GridView::new(
            vec![SiteState::new(s(0), 100.0, 1), SiteState::new(s(1), 1.0, 8)],
            full_mesh(2, 1e8),
            CostWeights::default(),
        );
        let mut j = job(0, JobDataSpec::local(s(0)));
        j.processors_required = 4;
        let p = select_site(std::slice::from_ref(&j), &view).unwrap();
        assert_eq!(p.site, s(1));
        assert!(!p.per_candidate.contains_key(&s(0)));
        j.processors_required = 16;
        assert!(matches!(
            select_site(&[j], &view),
            Err(SchedulerError::NoRunnableSite { processors: 16, .. })
        ));
        assert_eq!(select_site(&[], &view), Err(SchedulerError::EmptyBurst));
    }

    #[test]
    fn missing_route_is_reported() {
        let view = GridView::new(
            vec![SiteState::new(s(0), 1.0, 1), SiteState::new(s(1), 1.0, 1)],
            Topology::default(),
            CostWeights::default(),
        );
        let err = select_site(&[job(0, JobDataSpec::local(s(0)))], &view).unwrap_err();
        assert!(err.to_string().contains("site0"), "{err}");
    }

    #[test]
    fn greedy_ignores_data() {
        let a = SiteState::new(s(0), 1.0, 4);
        let mut b = SiteState::new(s(1), 1.0, 4);
        b.queue_length = 0;
        let mut a = a;
        a.queue_length = 1;
        let view = GridView::new(vec![a, b], full_mesh(2, 1e6), CostWeights::default());
        let data = JobDataSpec {
            input_bytes: 1e10,
            ..JobDataSpec::local(s(0))
        };
        assert_eq!(select_site_greedy(&[job(0, data.clone())], &view).unwrap().site, s(1));
        assert_eq!(select_site(&[job(0, data)], &view).unwrap().site, s(0));
    }

    #[test]
    fn should_export_branches() {
        let mut site = SiteState::new(s(0), 1.0, 4);
        site.queue_length = 3;
        assert!(!should_export(&site, &LittleEstimate::new(1.0, 1.0, 2.0), 5.0));
        assert!(should_export(&site, &LittleEstimate::new(3.0, 1.0, 2.0), 5.0));
        site.queue_length = 100;
        assert!(should_export(&site, &LittleEstimate::new(1.0, 1.0, 2.0), 5.0));
        site.queue_length = 20;
        assert!(!should_export(&site, &LittleEstimate::new(1.0, 1.0, 2.0), 5.0));
    }

    fn loaded_view() -> GridView {
        let mut busy = SiteState::new(s(0), 1.0, 2);
        busy.queue_length = 50;
        busy.load = 1.0;
        let mut mid = SiteState::new(s(1), 1.0, 2);
        mid.queue_length = 10;
        let idle = SiteState::new(s(2), 1.0, 2);
        GridView::new(vec![busy, mid, idle], full_mesh(3, 1e9), CostWeights::default())
    }

    #[test]
    fn replicated_data_exported_to_cheapest_remote() {
        let mut view = loaded_view();
        let mut jobs = vec![job(0, JobDataSpec::local(s(0))).with_dataset(DatasetId(1))];
        for site in &mut view.sites {
            site.hosted_data.insert(DatasetId(1));
        }
        let exports = export_jobs(&mut jobs, s(0), &view).unwrap();
        // brute force over remotes
        let local = job_cost(&jobs[0], view.site(s(0)).unwrap(), &view).unwrap().total;
        let best = [s(1), s(2)]
            .into_iter()
            .map(|id| (id, job_cost(&jobs[0], view.site(id).unwrap(), &view).unwrap().total))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(best.1 < local);
        assert_eq!(exports.len(), 1);
        assert_eq!(exports[0].to, best.0);
        assert_eq!(exports[0].to, s(2));
        assert!(!jobs[0].remigratable);
    }

    #[test]
    fn heavy_local_data_stays() {
        let mut view = loaded_view();
        view.topology = full_mesh(3, 1e6);
        let data = JobDataSpec {
            input_bytes: 1e11,
            ..JobDataSpec::local(s(0))
        };
        let mut jobs = vec![job(0, data)];
        assert!(export_jobs(&mut jobs, s(0), &view).unwrap().is_empty());
        assert!(jobs[0].remigratable);
    }

    #[test]
    fn already_migrated_jobs_skipped() {
        let view = loaded_view();
        let mut j = job(0, JobDataSpec::local(s(1)));
        j.remigratable = false;
        let mut jobs = vec![j];
        assert!(export_jobs(&mut jobs, s(0), &view).unwrap().is_empty());
    }

    #[test]
    fn no_remote_candidate_is_empty() {
        let view = GridView::new(vec![SiteState::new(s(0), 1.0, 1)], Topology::default(), CostWeights::default());
        let mut jobs = vec![job(0, JobDataSpec::local(s(0)))];
        assert!(export_jobs(&mut jobs, s(0), &view).unwrap().is_empty());
    }

    #[test]
    fn working_view_tracks_moves() {
        // Two jobs whose data is everywhere: the first goes to the idle site,
        // which then carries one more queued job.
        let mut view = loaded_view();
        for site in &mut view.sites {
            site.hosted_data.insert(DatasetId(1));
        }
        view.site_mut(s(1)).unwrap().queue_length = 1;
        let mut jobs: Vec<Job> = (0..2)
            .map(|i| job(i, JobDataSpec::local(s(0))).with_dataset(DatasetId(1)))
            .collect();
        let exports = export_jobs(&mut jobs, s(0), &view).unwrap();
        assert_eq!(exports.iter().map(|e| e.to).collect::<Vec<_>>(), vec![s(2), s(1)]);
        assert!(exports.iter().all(|e| e.remote_cost < e.local_cost));
    }

    #[test]
    fn estimate_from_synthetic_log() {
        let mut log = EventLog::new();
        let site = SiteState::new(s(0), 1.0, 2);
        for i in 0..10 {
            log.push(
                f64::from(i) * 0.5,
                EventKind::Enqueue,
                Some(JobId(u64::from(i as u32))),
                Some(s(0)),
                EventPayload::Enqueue { level: 1, migrated: false },
            );
        }
        for (i, w) in [1.0, 2.0, 6.0].into_iter().enumerate() {
            log.push(
                4.6,
                EventKind::TransferStart,
                Some(JobId(i as u64)),
                Some(s(0)),
                EventPayload::Transfer {
                    phase: TransferPhase::StageIn,
                    duration: 0.0,
                    queue_wait: w,
                },
            );
            log.push(
                4.6,
                EventKind::ExecStart,
                Some(JobId(i as u64)),
                Some(s(0)),
                EventPayload::Exec {
                    service_time: 4.0,
                    processors: 1,
                },
            );
        }
        let est = estimate_arrivals(&log, &site, 4.9, 5.0);
        assert_eq!(est.arrival_rate, 2.0);
        assert_eq!(est.avg_wait, 3.0);
        assert_eq!(est.predicted_queue, 6.0);
        assert_eq!(est.service_capacity, 0.5);

        let quiet = estimate_arrivals(&log, &site, 100.0, 5.0);
        assert_eq!(quiet.arrival_rate, 0.0);
        assert_eq!(quiet.predicted_queue, 0.0);
        assert_eq!(quiet.service_capacity, 0.5);

        let empty = estimate_arrivals(&EventLog::new(), &site, 10.0, 5.0);
        assert_eq!(empty.arrival_rate, 0.0);
        assert!(empty.service_capacity.is_infinite());
    }

    #[test]
    fn scheduler_kind_parses() {
        for k in [SchedulerKind::Diana, SchedulerKind::GreedyCompute, SchedulerKind::Random] {
            assert_eq!(k.as_str().parse::<SchedulerKind>().unwrap(), k);
        }
        assert!("fastest".parse::<SchedulerKind>().is_err());
    }
}
