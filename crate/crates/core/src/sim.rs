//! Deterministic discrete-event simulation of a grid of sites.
//!
//! A run walks pending actions in `(time, sequence)` order. Bursts arrive,
//! are placed by the configured scheduler and enqueued in the chosen site's
//! feedback queues. A site dispatches its queue head once enough processors
//! are free (head-of-line, non-preemptive); the job holds its processors
//! through stage-in and execution, then ships output to its user. A periodic
//! tick ages every queue and re-checks sites for overload.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cost::{stage_in_time, stage_out_time, CostError, SiteState, Topology};
use crate::events::{EventKind, EventLog, EventPayload, SiteInfo, TransferPhase};
use crate::ids::{JobId, SiteId};
use crate::queues::{FeedbackQueues, Job, JobState, QueueError};
use crate::scenario::{Scenario, ValidationErrors};
use crate::scheduler::{
    estimate_arrivals, export_jobs, localized, place_burst, should_export, GridView, SchedulerError,
};
use crate::workload::{generate_workload, Burst};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario:\n{0}")]
    Invalid(#[from] ValidationErrors),
    #[error("{job} needs {needed} processors but {site} has {available}")]
    Unrunnable {
        job: JobId,
        site: SiteId,
        needed: u32,
        available: u32,
    },
    #[error("scheduling failed: {0}")]
    Scheduler(#[from] SchedulerError),
    #[error("queue operation failed: {0}")]
    Queue(#[from] QueueError),
    #[error("simulation corrupt at t={time}: {reason}")]
    Corrupt { time: f64, reason: String },
}

/// Seconds `job` occupies its processors at `site`.
pub fn job_service_time(job: &Job, site: &SiteState) -> Result<f64, SimError> {
    if job.processors_required > site.processors {
        return Err(SimError::Unrunnable {
            job: job.id,
            site: site.id,
            needed: job.processors_required,
            available: site.processors,
        });
    }
    if !(site.capability.is_finite() && site.capability > 0.0) {
        return Err(SchedulerError::Cost(CostError::InvalidSite {
            site: site.id,
            reason: "capability must be finite and > 0",
        })
        .into());
    }
    Ok(job.compute_demand / site.capability)
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Burst(usize),
    StageInDone(usize, JobId),
    ExecDone(usize, JobId),
    StageOutDone(usize, JobId),
    AgingTick,
}

#[derive(Debug)]
struct Pending {
    time: f64,
    seq: u64,
    action: Action,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

struct InFlight {
    job: Job,
    stage_in: f64,
    queue_wait: f64,
    stage_out: f64,
}

struct SiteRuntime {
    queues: FeedbackQueues,
    free: u32,
    executing: u32,
    in_flight: BTreeMap<JobId, InFlight>,
}

struct Engine<'a> {
    scenario: &'a Scenario,
    view: GridView,
    index: BTreeMap<SiteId, usize>,
    sites: Vec<SiteRuntime>,
    log: EventLog,
    heap: BinaryHeap<Pending>,
    next_seq: u64,
    now: f64,
    rng: ChaCha8Rng,
    bursts: Vec<Option<Burst>>,
    total_jobs: usize,
    migration: bool,
    arrived: usize,
    completed: usize,
    transferring: usize,
    running: usize,
}

/// Runs `scenario` to `duration` or until no work is left.
pub fn run(scenario: &Scenario) -> Result<EventLog, SimError> {
    scenario.validate()?;
    Engine::new(scenario)?.run()
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self, SimError> {
        let mut log = EventLog::new();
        let mut sites = scenario.sites.clone();
        sites.sort_by_key(|s| s.id);
        log.push(
            0.0,
            EventKind::Start,
            None,
            None,
            EventPayload::Start {
                sites: sites
                    .iter()
                    .map(|s| SiteInfo {
                        id: s.id,
                        processors: s.processors,
                        capability: s.capability,
                    })
                    .collect(),
            },
        );

        let mut topology: Topology = scenario.topology();
        let min_loss = scenario.weights.min_loss_prob;
        for link in topology.links_mut() {
            if link.loss_prob < min_loss {
                log.push(
                    0.0,
                    EventKind::Warning,
                    None,
                    Some(link.src),
                    EventPayload::Warning {
                        message: format!(
                            "loss_prob {} on link {}->{} raised to {}",
                            link.loss_prob, link.src.0, link.dst.0, min_loss
                        ),
                    },
                );
                link.loss_prob = min_loss;
            }
        }

        let ids: Vec<SiteId> = sites.iter().map(|s| s.id).collect();
        let max_processors = sites.iter().map(|s| s.processors).max().unwrap_or(1);
        let workload = generate_workload(&scenario.workload, &ids, max_processors, scenario.seed);
        for site in &mut sites {
            site.queue_length = 0;
            site.load = 0.0;
            if let Some(hosted) = workload.hosting.get(&site.id) {
                site.hosted_data.extend(hosted.iter().copied());
            }
        }

        let runtimes = sites
            .iter()
            .map(|s| {
                Ok(SiteRuntime {
                    queues: FeedbackQueues::new(scenario.policy.clone())?,
                    free: s.processors,
                    executing: 0,
                    in_flight: BTreeMap::new(),
                })
            })
            .collect::<Result<Vec<_>, QueueError>>()?;

        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        rng.set_stream(1);
        let total_jobs = workload.job_count();
        let mut engine = Engine {
            scenario,
            index: ids.iter().enumerate().map(|(i, id)| (*id, i)).collect(),
            view: GridView::new(sites, topology, scenario.weights.clone()),
            sites: runtimes,
            log,
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: 0.0,
            rng,
            bursts: Vec::new(),
            total_jobs,
            migration: scenario.migration_enabled(),
            arrived: 0,
            completed: 0,
            transferring: 0,
            running: 0,
        };
        for (i, burst) in workload.bursts.into_iter().enumerate() {
            engine.schedule(burst.time, Action::Burst(i));
            engine.bursts.push(Some(burst));
        }
        if total_jobs > 0 {
            engine.schedule(scenario.aging_tick(), Action::AgingTick);
        }
        Ok(engine)
    }

    fn schedule(&mut self, time: f64, action: Action) {
        self.heap.push(Pending {
            time,
            seq: self.next_seq,
            action,
        });
        self.next_seq += 1;
    }

    fn emit(&mut self, kind: EventKind, job: Option<JobId>, site: usize, payload: EventPayload) {
        let site = Some(self.view.sites[site].id);
        self.log.push(self.now, kind, job, site, payload);
    }

    fn corrupt(&self, reason: impl Into<String>) -> SimError {
        SimError::Corrupt {
            time: self.now,
            reason: reason.into(),
        }
    }

    fn run(mut self) -> Result<EventLog, SimError> {
        let duration = self.scenario.duration;
        let mut end = None;
        while let Some(next) = self.heap.pop() {
            if next.time > duration {
                end = Some(duration);
                break;
            }
            if next.time < self.now {
                return Err(self.corrupt("event scheduled in the past"));
            }
            self.now = next.time;
            match next.action {
                Action::Burst(i) => self.on_burst(i)?,
                Action::StageInDone(s, job) => self.on_stage_in_done(s, job)?,
                Action::ExecDone(s, job) => self.on_exec_done(s, job)?,
                Action::StageOutDone(s, job) => self.on_stage_out_done(s, job)?,
                Action::AgingTick => self.on_tick()?,
            }
            self.check_conservation()?;
        }
        let end = end.unwrap_or(self.now);
        self.log.push(end, EventKind::End, None, None, EventPayload::None);
        Ok(self.log)
    }

    fn check_conservation(&self) -> Result<(), SimError> {
        let queued: usize = self.sites.iter().map(|s| s.queues.len()).sum();
        let accounted = self.completed + queued + self.transferring + self.running;
        if accounted != self.arrived {
            return Err(self.corrupt(format!(
                "{} arrivals but {} completed + {} queued + {} transferring + {} running",
                self.arrived, self.completed, queued, self.transferring, self.running
            )));
        }
        Ok(())
    }

    fn refresh(&mut self, s: usize) {
        let rt = &self.sites[s];
        let site = &mut self.view.sites[s];
        site.queue_length = rt.queues.len();
        site.load = f64::from(site.processors - rt.free) / f64::from(site.processors);
    }

    fn on_burst(&mut self, i: usize) -> Result<(), SimError> {
        let burst = self.bursts[i]
            .take()
            .ok_or_else(|| self.corrupt("burst delivered twice"))?;
        for job in &burst.jobs {
            self.log.push(
                self.now,
                EventKind::Arrival,
                Some(job.id),
                None,
                EventPayload::Arrival {
                    owner: job.owner,
                    burst: job.burst,
                    processors_required: job.processors_required,
                    compute_demand: job.compute_demand,
                },
            );
        }
        self.arrived += burst.jobs.len();

        let placement = place_burst(self.scenario.scheduler_kind, &burst.jobs, &self.view, &mut self.rng)?;
        let s = self.index[&placement.site];
        for job in &burst.jobs {
            self.emit(
                EventKind::Placement,
                Some(job.id),
                s,
                EventPayload::Placement {
                    burst: burst.id,
                    cost: placement.cost,
                },
            );
        }

        let enq = self.sites[s].queues.enqueue_burst(burst.jobs, self.now)?;
        let base = self.scenario.policy.base_level;
        for id in &enq.order {
            self.emit(
                EventKind::Enqueue,
                Some(*id),
                s,
                EventPayload::Enqueue {
                    level: enq.level,
                    migrated: false,
                },
            );
            if enq.level > base {
                self.emit(
                    EventKind::Demotion,
                    Some(*id),
                    s,
                    EventPayload::Level {
                        from: base,
                        to: enq.level,
                    },
                );
            }
        }
        self.refresh(s);
        if self.migration {
            self.migrate_from(s)?;
        }
        self.dispatch_all()
    }

    fn migrate_from(&mut self, s: usize) -> Result<(), SimError> {
        let window = self.scenario.estimate_window;
        let factor = self.scenario.migration.overload_factor;
        let est = estimate_arrivals(&self.log, &self.view.sites[s], self.now, window);
        if !should_export(&self.view.sites[s], &est, factor) {
            return Ok(());
        }
        let from = self.view.sites[s].id;
        let candidates: Vec<Job> = self.sites[s]
            .queues
            .export_order()
            .into_iter()
            .filter_map(|id| self.sites[s].queues.get(id).filter(|j| j.remigratable).cloned())
            .collect();
        for job in candidates {
            if !should_export(&self.view.sites[s], &est, factor) {
                break;
            }
            let mut one = [job];
            let Some(export) = export_jobs(&mut one, from, &self.view)?.into_iter().next() else {
                continue;
            };
            let [job] = one;
            self.sites[s]
                .queues
                .remove(job.id)
                .ok_or_else(|| self.corrupt(format!("{} vanished from {}", job.id, from)))?;
            self.emit(
                EventKind::Export,
                Some(job.id),
                s,
                EventPayload::Export {
                    from,
                    to: export.to,
                    local_cost: export.local_cost,
                    remote_cost: export.remote_cost,
                },
            );
            let d = self.index[&export.to];
            let id = job.id;
            let level = self.sites[d].queues.enqueue_migrated(job, self.now)?;
            self.emit(EventKind::Enqueue, Some(id), d, EventPayload::Enqueue { level, migrated: true });
            self.refresh(s);
            self.refresh(d);
        }
        Ok(())
    }

    fn dispatch_all(&mut self) -> Result<(), SimError> {
        for s in 0..self.sites.len() {
            self.dispatch(s)?;
        }
        Ok(())
    }

    fn dispatch(&mut self, s: usize) -> Result<(), SimError> {
        while let Some(head) = self.sites[s].queues.peek_next() {
            if head.processors_required > self.view.sites[s].processors {
                return Err(self.corrupt(format!("{} cannot fit at {}", head.id, self.view.sites[s].id)));
            }
            if head.processors_required > self.sites[s].free {
                break;
            }
            let mut job = self.sites[s].queues.next_job().expect("peeked");
            let site = &self.view.sites[s];
            let data = localized(&job, site).into_owned();
            let (stage_in, stage_out) = match stage_in_time(&data, site.id, &self.view.topology)
                .and_then(|i| Ok((i, stage_out_time(&data, site.id, &self.view.topology)?)))
            {
                Ok(t) => t,
                Err(e) => {
                    self.requeue_at_source(s, job, e)?;
                    continue;
                }
            };
            self.sites[s].free -= job.processors_required;
            let queue_wait = self.now - job.enqueue_time;
            job.state = JobState::Transferring;
            self.transferring += 1;
            let id = job.id;
            self.emit(
                EventKind::TransferStart,
                Some(id),
                s,
                EventPayload::Transfer {
                    phase: TransferPhase::StageIn,
                    duration: stage_in,
                    queue_wait,
                },
            );
            self.sites[s].in_flight.insert(
                id,
                InFlight {
                    job,
                    stage_in,
                    queue_wait,
                    stage_out,
                },
            );
            self.schedule(self.now + stage_in, Action::StageInDone(s, id));
            self.refresh(s);
        }
        Ok(())
    }

    /// Route failure at dispatch: the job goes back to its input-data site.
    fn requeue_at_source(&mut self, s: usize, job: Job, err: CostError) -> Result<(), SimError> {
        let id = job.id;
        self.emit(
            EventKind::Warning,
            Some(id),
            s,
            EventPayload::Warning {
                message: format!("stage-in failed: {err}"),
            },
        );
        let target = self
            .index
            .get(&job.data.input_source)
            .copied()
            .filter(|&t| t != s && self.view.sites[t].processors >= job.processors_required)
            .ok_or_else(|| self.corrupt(format!("{id} has no reachable site: {err}")))?;
        let level = self.sites[target].queues.enqueue_migrated(job, self.now)?;
        self.emit(EventKind::Enqueue, Some(id), target, EventPayload::Enqueue { level, migrated: true });
        self.refresh(s);
        self.refresh(target);
        Ok(())
    }

    fn on_stage_in_done(&mut self, s: usize, id: JobId) -> Result<(), SimError> {
        let site = self.view.sites[s].clone();
        let flight = self.sites[s]
            .in_flight
            .get_mut(&id)
            .ok_or_else(|| SimError::Corrupt {
                time: self.now,
                reason: format!("{id} not in flight at {}", site.id),
            })?;
        let service = job_service_time(&flight.job, &site)?;
        flight.job.state = JobState::Running;
        let (stage_in, queue_wait, procs) = (flight.stage_in, flight.queue_wait, flight.job.processors_required);
        self.emit(
            EventKind::TransferEnd,
            Some(id),
            s,
            EventPayload::Transfer {
                phase: TransferPhase::StageIn,
                duration: stage_in,
                queue_wait,
            },
        );
        self.transferring -= 1;
        self.running += 1;
        self.sites[s].executing += procs;
        if self.sites[s].executing > site.processors {
            return Err(self.corrupt(format!(
                "{} runs {} processors on {}",
                site.id, self.sites[s].executing, site.processors
            )));
        }
        self.emit(
            EventKind::ExecStart,
            Some(id),
            s,
            EventPayload::Exec {
                service_time: service,
                processors: procs,
            },
        );
        self.schedule(self.now + service, Action::ExecDone(s, id));
        Ok(())
    }

    fn on_exec_done(&mut self, s: usize, id: JobId) -> Result<(), SimError> {
        let Some(flight) = self.sites[s].in_flight.get(&id) else {
            return Err(self.corrupt(format!("{id} finished but was not running")));
        };
        let (procs, stage_out) = (flight.job.processors_required, flight.stage_out);
        let service = flight.job.compute_demand / self.view.sites[s].capability;
        self.emit(
            EventKind::ExecEnd,
            Some(id),
            s,
            EventPayload::Exec {
                service_time: service,
                processors: procs,
            },
        );
        self.sites[s].executing -= procs;
        self.sites[s].free += procs;
        self.emit(
            EventKind::TransferStart,
            Some(id),
            s,
            EventPayload::Transfer {
                phase: TransferPhase::StageOut,
                duration: stage_out,
                queue_wait: 0.0,
            },
        );
        self.schedule(self.now + stage_out, Action::StageOutDone(s, id));
        self.refresh(s);
        self.dispatch(s)
    }

    fn on_stage_out_done(&mut self, s: usize, id: JobId) -> Result<(), SimError> {
        let Some(mut flight) = self.sites[s].in_flight.remove(&id) else {
            return Err(self.corrupt(format!("{id} delivered output but was not in flight")));
        };
        flight.job.state = JobState::Done;
        self.emit(
            EventKind::TransferEnd,
            Some(id),
            s,
            EventPayload::Transfer {
                phase: TransferPhase::StageOut,
                duration: flight.stage_out,
                queue_wait: 0.0,
            },
        );
        self.running -= 1;
        self.completed += 1;
        Ok(())
    }

    fn on_tick(&mut self) -> Result<(), SimError> {
        for s in 0..self.sites.len() {
            for p in self.sites[s].queues.apply_aging(self.now) {
                self.emit(EventKind::Promotion, Some(p.job), s, EventPayload::Level { from: p.from, to: p.to });
            }
        }
        if self.migration {
            for s in 0..self.sites.len() {
                self.migrate_from(s)?;
            }
        }
        self.dispatch_all()?;
        if self.arrived < self.total_jobs || self.completed < self.arrived {
            self.schedule(self.now + self.scenario.aging_tick(), Action::AgingTick);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures::two_sites;
    use crate::workload::Distribution;

    #[test]
    fn service_time_examples() {
        let site = SiteState::new(SiteId(0), 50.0, 2);
        let job = Job::new(
            JobId(0),
            crate::ids::UserId(0),
            crate::ids::BurstId(0),
            1,
            100.0,
            crate::cost::JobDataSpec::local(SiteId(0)),
        );
        assert_eq!(job_service_time(&job, &site).unwrap(), 2.0);
        let mut big = job.clone();
        big.processors_required = 3;
        assert!(matches!(job_service_time(&big, &site), Err(SimError::Unrunnable { .. })));
    }

    #[test]
    fn empty_workload_logs_only_bookkeeping() {
        let mut s = two_sites();
        s.workload.users = 0;
        let log = run(&s).unwrap();
        let kinds: Vec<EventKind> = log.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::Start, EventKind::End]);
    }

    #[test]
    fn single_local_job_closed_form() {
        let mut s = two_sites();
        s.sites.truncate(1);
        s.topology.clear();
        s.workload.bursts_per_user = 1;
        s.workload.burst_size = Distribution::Constant { value: 1.0 };
        let log = run(&s).unwrap();
        let start = log.of_kind(EventKind::ExecStart).next().unwrap().time;
        let end = log.of_kind(EventKind::ExecEnd).next().unwrap().time;
        assert_eq!(start, 0.0);
        assert_eq!(end, start + 20.0 / 10.0);
        let transfers: Vec<_> = log.of_kind(EventKind::TransferStart).collect();
        assert_eq!(transfers.len(), 2);
        assert!(transfers.iter().all(|e| matches!(e.payload, EventPayload::Transfer { duration, .. } if duration == 0.0)));
    }

    #[test]
    fn reruns_are_identical() {
        let mut s = two_sites();
        s.workload.inter_arrival = Distribution::Exponential { mean: 3.0 };
        s.workload.bursts_per_user = 20;
        s.workload.users = 3;
        assert_eq!(run(&s).unwrap(), run(&s).unwrap());
    }

    #[test]
    fn invalid_scenario_rejected() {
        let mut s = two_sites();
        s.duration = -1.0;
        assert!(matches!(run(&s), Err(SimError::Invalid(_))));
    }

    #[test]
    fn low_loss_clamped_with_warning() {
        let mut s = two_sites();
        s.topology[0].loss_prob = 0.0;
        let log = run(&s).unwrap();
        assert_eq!(log.of_kind(EventKind::Warning).count(), 1);
    }

    #[test]
    fn duration_truncates_run() {
        let mut s = two_sites();
        s.duration = 1.0;
        let log = run(&s).unwrap();
        assert_eq!(log.events.last().unwrap().time, 1.0);
        assert!(log.of_kind(EventKind::ExecEnd).count() < 6);
    }
}
