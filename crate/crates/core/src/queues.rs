//! Multilevel feedback queues for bulk jobs.
//!
//! Level 0 is the highest priority. A burst lands on a single level chosen
//! from its owner's recent submission frequency: every job above
//! `job_threshold` in the current window pushes new bursts further down.
//! Jobs that wait climb back up `aging_step` levels per elapsed
//! `time_threshold`. Inside a level service is FCFS, and a burst is ordered
//! shortest-job-first (fewest processors) before it is appended.
//!
//! Priority is purely system-centric: no job-supplied field influences the
//! level.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::JobDataSpec;
use crate::ids::{BurstId, DatasetId, JobId, UserId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueueError {
    #[error("{0} is already queued")]
    DuplicateEnqueue(JobId),
    #[error("{job} is in state {state:?}, expected pending")]
    NotPending { job: JobId, state: JobState },
    #[error("burst mixes owners or burst ids ({0})")]
    MixedBurst(JobId),
    #[error("invalid priority policy: {0}")]
    InvalidPolicy(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Pending,
    Queued,
    Transferring,
    Running,
    Done,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub owner: UserId,
    pub burst: BurstId,
    pub processors_required: u32,
    /// Work units; service time at a site is `compute_demand / capability`.
    pub compute_demand: f64,
    pub data: JobDataSpec,
    /// Dataset read as input. A candidate site hosting it reads the input locally.
    pub dataset: Option<DatasetId>,
    pub submit_time: f64,
    /// Time the job entered its current site's queues.
    pub enqueue_time: f64,
    pub current_level: usize,
    /// Cleared once the job has been exported; exported jobs never move again.
    pub remigratable: bool,
    pub state: JobState,
    aging_credits: u64,
}

impl Job {
    pub fn new(
        id: JobId,
        owner: UserId,
        burst: BurstId,
        processors_required: u32,
        compute_demand: f64,
        data: JobDataSpec,
    ) -> Self {
        Self {
            id,
            owner,
            burst,
            processors_required,
            compute_demand,
            data,
            dataset: None,
            submit_time: 0.0,
            enqueue_time: 0.0,
            current_level: 0,
            remigratable: true,
            state: JobState::Pending,
            aging_credits: 0,
        }
    }

    pub fn with_dataset(mut self, dataset: DatasetId) -> Self {
        self.dataset = Some(dataset);
        self
    }

    pub fn with_submit_time(mut self, t: f64) -> Self {
        self.submit_time = t;
        self
    }
}

/// Thresholds and step sizes of the priority curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorityPolicy {
    pub num_levels: usize,
    pub base_level: usize,
    /// Jobs per window a user may submit before new bursts are demoted.
    pub job_threshold: u32,
    /// Seconds per aging step; also the length of the frequency window.
    pub time_threshold: f64,
    /// Levels of demotion per job above `job_threshold`.
    pub decay_per_excess_job: f64,
    /// Levels of promotion per elapsed `time_threshold`.
    pub aging_step: usize,
    /// Order each burst by processors required before enqueueing.
    pub sjf_ordering: bool,
}

impl Default for PriorityPolicy {
    fn default() -> Self {
        Self {
            num_levels: 3,
            base_level: 1,
            job_threshold: 20,
            time_threshold: 60.0,
            decay_per_excess_job: 0.1,
            aging_step: 1,
            sjf_ordering: true,
        }
    }
}

impl PriorityPolicy {
    pub fn violations(&self) -> Vec<(&'static str, &'static str)> {
        let mut out = Vec::new();
        if self.num_levels < 2 {
            out.push(("num_levels", "must be >= 2"));
        }
        if self.base_level >= self.num_levels {
            out.push(("base_level", "must be < num_levels"));
        }
        if self.job_threshold == 0 {
            out.push(("job_threshold", "must be > 0"));
        }
        if !(self.time_threshold.is_finite() && self.time_threshold > 0.0) {
            out.push(("time_threshold", "must be finite and > 0"));
        }
        if !(self.decay_per_excess_job.is_finite() && self.decay_per_excess_job >= 0.0) {
            out.push(("decay_per_excess_job", "must be finite and >= 0"));
        }
        out
    }

    fn lowest_level(&self) -> usize {
        self.num_levels - 1
    }
}

/// Per-user submission count inside the current frequency window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserStats {
    pub owner: UserId,
    pub jobs_in_window: u32,
    pub window_start: f64,
}

impl UserStats {
    pub fn new(owner: UserId, now: f64) -> Self {
        Self {
            owner,
            jobs_in_window: 0,
            window_start: now,
        }
    }

    /// Starts a fresh window once `window` seconds have passed.
    pub fn advance(&mut self, now: f64, window: f64) {
        if now - self.window_start >= window {
            self.window_start = now;
            self.jobs_in_window = 0;
        }
    }
}

/// Queue level for a user's next submission after `wait_time` seconds.
pub fn effective_priority(stats: &UserStats, wait_time: f64, policy: &PriorityPolicy) -> usize {
    let excess = stats.jobs_in_window.saturating_sub(policy.job_threshold) as f64;
    let aged = if wait_time > 0.0 {
        (wait_time / policy.time_threshold).floor() * policy.aging_step as f64
    } else {
        0.0
    };
    let raw = (policy.base_level as f64 + policy.decay_per_excess_job * excess).floor() - aged;
    raw.clamp(0.0, policy.lowest_level() as f64) as usize
}

/// Where a burst landed and the order its jobs were appended in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BurstEnqueue {
    pub level: usize,
    pub order: Vec<JobId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Promotion {
    pub job: JobId,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueueSnapshot {
    pub per_level: Vec<usize>,
    pub total: usize,
}

#[derive(Debug, Clone)]
pub struct FeedbackQueues {
    levels: Vec<VecDeque<Job>>,
    users: BTreeMap<UserId, UserStats>,
    queued: BTreeSet<JobId>,
    policy: PriorityPolicy,
}

impl FeedbackQueues {
    pub fn new(policy: PriorityPolicy) -> Result<Self, QueueError> {
        if let Some((_, why)) = policy.violations().first() {
            return Err(QueueError::InvalidPolicy(why));
        }
        Ok(Self {
            levels: vec![VecDeque::new(); policy.num_levels],
            users: BTreeMap::new(),
            queued: BTreeSet::new(),
            policy,
        })
    }

    pub fn policy(&self) -> &PriorityPolicy {
        &self.policy
    }

    pub fn user_stats(&self, owner: UserId) -> Option<&UserStats> {
        self.users.get(&owner)
    }

    fn stats_at(&mut self, owner: UserId, now: f64) -> &mut UserStats {
        let window = self.policy.time_threshold;
        let stats = self.users.entry(owner).or_insert_with(|| UserStats::new(owner, now));
        stats.advance(now, window);
        stats
    }

    /// Enqueues a burst on one level in SJF order.
    pub fn enqueue_burst(&mut self, mut burst: Vec<Job>, now: f64) -> Result<BurstEnqueue, QueueError> {
        let Some(first) = burst.first() else {
            return Ok(BurstEnqueue {
                level: self.policy.base_level,
                order: Vec::new(),
            });
        };
        let (owner, burst_id) = (first.owner, first.burst);
        let mut seen = BTreeSet::new();
        for job in &burst {
            if job.owner != owner || job.burst != burst_id {
                return Err(QueueError::MixedBurst(job.id));
            }
            if self.queued.contains(&job.id) || !seen.insert(job.id) {
                return Err(QueueError::DuplicateEnqueue(job.id));
            }
            if job.state != JobState::Pending {
                return Err(QueueError::NotPending {
                    job: job.id,
                    state: job.state,
                });
            }
        }
        if self.policy.sjf_ordering {
            burst.sort_by_key(|j| (j.processors_required, j.id));
        }

        let policy = self.policy.clone();
        let stats = self.stats_at(owner, now);
        let level = effective_priority(stats, 0.0, &policy);
        stats.jobs_in_window = stats.jobs_in_window.saturating_add(burst.len() as u32);

        let mut order = Vec::with_capacity(burst.len());
        for mut job in burst {
            self.queued.insert(job.id);
            order.push(job.id);
            job.state = JobState::Queued;
            job.enqueue_time = now;
            job.current_level = level;
            job.aging_credits = 0;
            self.levels[level].push_back(job);
        }
        Ok(BurstEnqueue { level, order })
    }

    /// Enqueues a job exported from another site. Its level is recomputed
    /// from this site's view of the owner; it is not counted again.
    pub fn enqueue_migrated(&mut self, mut job: Job, now: f64) -> Result<usize, QueueError> {
        if self.queued.contains(&job.id) {
            return Err(QueueError::DuplicateEnqueue(job.id));
        }
        let policy = self.policy.clone();
        let level = effective_priority(self.stats_at(job.owner, now), 0.0, &policy);
        self.queued.insert(job.id);
        job.state = JobState::Queued;
        job.enqueue_time = now;
        job.current_level = level;
        job.aging_credits = 0;
        self.levels[level].push_back(job);
        Ok(level)
    }

    pub fn peek_next(&self) -> Option<&Job> {
        self.levels.iter().find_map(|l| l.front())
    }

    /// Removes the head of the highest-priority non-empty level.
    pub fn next_job(&mut self) -> Option<Job> {
        let job = self.levels.iter_mut().find_map(|l| l.pop_front())?;
        self.queued.remove(&job.id);
        Some(job)
    }

    /// Promotes every job that crossed a new multiple of `time_threshold`.
    pub fn apply_aging(&mut self, now: f64) -> Vec<Promotion> {
        let threshold = self.policy.time_threshold;
        let step = self.policy.aging_step as u64;
        let mut moved: Vec<Job> = Vec::new();
        let mut promotions = Vec::new();
        for (level, queue) in self.levels.iter_mut().enumerate() {
            let mut stay = VecDeque::with_capacity(queue.len());
            for mut job in queue.drain(..) {
                let elapsed = ((now - job.enqueue_time) / threshold).floor();
                let crossed = if elapsed > 0.0 { elapsed as u64 } else { 0 };
                if crossed <= job.aging_credits {
                    stay.push_back(job);
                    continue;
                }
                let steps = (crossed - job.aging_credits).saturating_mul(step);
                job.aging_credits = crossed;
                let to = level.saturating_sub(usize::try_from(steps).unwrap_or(usize::MAX));
                if to == level {
                    stay.push_back(job);
                } else {
                    promotions.push(Promotion { job: job.id, from: level, to });
                    job.current_level = to;
                    moved.push(job);
                }
            }
            *queue = stay;
        }
        for job in moved {
            let to = job.current_level;
            self.levels[to].push_back(job);
        }
        promotions
    }

    pub fn snapshot(&self) -> QueueSnapshot {
        let per_level: Vec<usize> = self.levels.iter().map(VecDeque::len).collect();
        let total = per_level.iter().sum();
        QueueSnapshot { per_level, total }
    }

    pub fn len(&self) -> usize {
        self.queued.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queued.is_empty()
    }

    pub fn contains(&self, job: JobId) -> bool {
        self.queued.contains(&job)
    }

    pub fn get(&self, id: JobId) -> Option<&Job> {
        self.iter().find(|j| j.id == id)
    }

    pub fn remove(&mut self, id: JobId) -> Option<Job> {
        if !self.queued.remove(&id) {
            return None;
        }
        for queue in &mut self.levels {
            if let Some(pos) = queue.iter().position(|j| j.id == id) {
                return queue.remove(pos);
            }
        }
        None
    }

    /// Jobs in service order: level 0 head first.
    pub fn iter(&self) -> impl Iterator<Item = &Job> {
        self.levels.iter().flatten()
    }

    /// Export candidates: lowest-priority level first, newest first.
    pub fn export_order(&self) -> Vec<JobId> {
        self.levels.iter().rev().flat_map(|l| l.iter().rev().map(|j| j.id)).collect()
    }
}
