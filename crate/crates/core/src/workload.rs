//! Synthetic bulk-submission workloads.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};

use crate::cost::JobDataSpec;
use crate::ids::{BurstId, DatasetId, JobId, SiteId, UserId};
use crate::queues::Job;
use crate::scenario::Violation;

/// Smallest compute demand a sampled job may carry.
pub const MIN_COMPUTE_DEMAND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Constant { value: f64 },
    /// `[lo, hi)` for real values, `lo..=hi` for counts.
    Uniform { lo: f64, hi: f64 },
    Exponential { mean: f64 },
}

impl Distribution {
    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Constant { value } => value,
            Distribution::Uniform { lo, hi } => (lo + hi) / 2.0,
            Distribution::Exponential { mean } => mean,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Constant { value } => value,
            Distribution::Uniform { lo, hi } => {
                if hi > lo {
                    rng.random_range(lo..hi)
                } else {
                    lo
                }
            }
            Distribution::Exponential { mean } => Exp::new(1.0 / mean).map(|d| d.sample(rng)).unwrap_or(mean),
        }
    }

    /// Integer sample, at least 1.
    pub fn sample_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let v = match *self {
            Distribution::Uniform { lo, hi } => {
                let (lo, hi) = (lo.round() as u64, hi.round() as u64);
                if hi > lo {
                    rng.random_range(lo..=hi) as f64
                } else {
                    lo as f64
                }
            }
            _ => self.sample(rng).round(),
        };
        v.clamp(1.0, f64::from(u32::MAX)) as u32
    }

    fn violations(&self, path: &str, allow_zero: bool, out: &mut Vec<Violation>) {
        let ok = |v: f64| v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
        let need = if allow_zero { "must be finite and >= 0" } else { "must be finite and > 0" };
        match *self {
            Distribution::Constant { value } if !ok(value) => out.push(Violation::new(format!("{path}.value"), need)),
            Distribution::Uniform { lo, hi } => {
                if !ok(lo) {
                    out.push(Violation::new(format!("{path}.lo"), need));
                }
                if !(hi.is_finite() && hi >= lo) {
                    out.push(Violation::new(format!("{path}.hi"), "must be finite and >= lo"));
                }
            }
            Distribution::Exponential { mean } if !(mean.is_finite() && mean > 0.0) => {
                out.push(Violation::new(format!("{path}.mean"), "must be finite and > 0"))
            }
            _ => {}
        }
    }
}

/// Where each user's dataset is hosted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataPlacement {
    /// One hosting site per dataset.
    #[default]
    SingleHome,
    /// `k` distinct hosting sites; the first drawn is the nominal source.
    Replicated { k: u32 },
}

fn constant(value: f64) -> Distribution {
    Distribution::Constant { value }
}

fn zero() -> Distribution {
    constant(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub users: u32,
    pub bursts_per_user: u32,
    pub burst_size: Distribution,
    pub inter_arrival: Distribution,
    pub compute_demand: Distribution,
    pub processors_required: Distribution,
    #[serde(default = "zero")]
    pub input_bytes: Distribution,
    #[serde(default = "zero")]
    pub output_bytes: Distribution,
    #[serde(default = "zero")]
    pub executable_bytes: Distribution,
    #[serde(default)]
    pub data_placement: DataPlacement,
    /// Site of user `u` is `user_sites[u % len]`; round-robin over sites when empty.
    #[serde(default)]
    pub user_sites: Vec<SiteId>,
    /// Relative chance of each site (in site order) hosting a dataset; uniform when empty.
    #[serde(default)]
    pub data_site_weights: Vec<f64>,
    /// Time of the first burst.
    #[serde(default)]
    pub start_time: f64,
    /// Extra delay of user `u`'s first burst: `u · user_offset`.
    #[serde(default)]
    pub user_offset: f64,
    /// Multiply each job's sampled demand by its processor count.
    #[serde(default)]
    pub demand_per_processor: bool,
}

impl WorkloadSpec {
    pub fn total_jobs_hint(&self) -> f64 {
        f64::from(self.users) * f64::from(self.bursts_per_user) * self.burst_size.mean()
    }

    pub fn violations(&self, sites: &[SiteId]) -> Vec<Violation> {
        let mut out = Vec::new();
        self.burst_size.violations("workload.burst_size", false, &mut out);
        self.inter_arrival.violations("workload.inter_arrival", false, &mut out);
        self.compute_demand.violations("workload.compute_demand", false, &mut out);
        self.processors_required
            .violations("workload.processors_required", false, &mut out);
        self.input_bytes.violations("workload.input_bytes", true, &mut out);
        self.output_bytes.violations("workload.output_bytes", true, &mut out);
        self.executable_bytes.violations("workload.executable_bytes", true, &mut out);
        if let DataPlacement::Replicated { k } = self.data_placement {
            if k == 0 || k as usize > sites.len() {
                out.push(Violation::new("workload.data_placement.k", "must lie in 1..=number of sites"));
            }
        }
        for (i, s) in self.user_sites.iter().enumerate() {
            if !sites.contains(s) {
                out.push(Violation::new(format!("workload.user_sites[{i}]"), "unknown site"));
            }
        }
        if !self.data_site_weights.is_empty() {
            if self.data_site_weights.len() != sites.len() {
                out.push(Violation::new("workload.data_site_weights", "needs one weight per site"));
            }
            for (i, w) in self.data_site_weights.iter().enumerate() {
                if !(w.is_finite() && *w >= 0.0) {
                    out.push(Violation::new(format!("workload.data_site_weights[{i}]"), "must be finite and >= 0"));
                }
            }
            if self.data_site_weights.iter().sum::<f64>() <= 0.0 {
                out.push(Violation::new("workload.data_site_weights", "must not all be zero"));
            }
        }
        for (name, v) in [("start_time", self.start_time), ("user_offset", self.user_offset)] {
            if !(v.is_finite() && v >= 0.0) {
                out.push(Violation::new(format!("workload.{name}"), "must be finite and >= 0"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Burst {
    pub id: BurstId,
    pub owner: UserId,
    pub time: f64,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Workload {
    /// Bursts in arrival order; ids follow the same order.
    pub bursts: Vec<Burst>,
    pub hosting: BTreeMap<SiteId, BTreeSet<DatasetId>>,
}

impl Workload {
    pub fn job_count(&self) -> usize {
        self.bursts.iter().map(|b| b.jobs.len()).sum()
    }
}

fn pick_data_sites<R: Rng + ?Sized>(spec: &WorkloadSpec, sites: &[SiteId], rng: &mut R) -> Vec<SiteId> {
    let k = match spec.data_placement {
        DataPlacement::SingleHome => 1,
        DataPlacement::Replicated { k } => (k as usize).clamp(1, sites.len()),
    };
    let mut weights: Vec<f64> = if spec.data_site_weights.len() == sites.len() {
        spec.data_site_weights.clone()
    } else {
        vec![1.0; sites.len()]
    };
    let mut chosen = Vec::with_capacity(k);
    while chosen.len() < k {
        let Ok(dist) = WeightedIndex::new(&weights) else {
            // remaining weights are all zero: take the lowest unused sites
            let need = k - chosen.len();
            let rest: Vec<SiteId> = sites.iter().filter(|s| !chosen.contains(*s)).copied().take(need).collect();
            chosen.extend(rest);
            break;
        };
        let i = dist.sample(rng);
        chosen.push(sites[i]);
        weights[i] = 0.0;
    }
    chosen
}

/// Generates every burst of the workload; deterministic in `(spec, sites, seed)`.
///
/// `sites` are the site ids in ascending order. Processor requests are
/// clamped to `max_processors` so every job fits somewhere.
pub fn generate_workload(spec: &WorkloadSpec, sites: &[SiteId], max_processors: u32, seed: u64) -> Workload {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hosting: BTreeMap<SiteId, BTreeSet<DatasetId>> = BTreeMap::new();
    if sites.is_empty() {
        return Workload::default();
    }

    struct Draft {
        time: f64,
        owner: UserId,
        index: u32,
        jobs: Vec<(u32, f64, f64, f64, f64)>,
        data_site: SiteId,
        user_site: SiteId,
        dataset: DatasetId,
    }

    let mut drafts = Vec::new();
    for u in 0..spec.users {
        let owner = UserId(u);
        let user_site = if spec.user_sites.is_empty() {
            sites[u as usize % sites.len()]
        } else {
            spec.user_sites[u as usize % spec.user_sites.len()]
        };
        let dataset = DatasetId(u);
        let data_sites = pick_data_sites(spec, sites, &mut rng);
        for s in &data_sites {
            hosting.entry(*s).or_default().insert(dataset);
        }
        let mut time = spec.start_time + f64::from(u) * spec.user_offset;
        for b in 0..spec.bursts_per_user {
            if b > 0 {
                time += spec.inter_arrival.sample(&mut rng).max(0.0);
            }
            let size = spec.burst_size.sample_count(&mut rng);
            let jobs = (0..size)
                .map(|_| {
                    let procs = spec.processors_required.sample_count(&mut rng).min(max_processors.max(1));
                    let mut demand = spec.compute_demand.sample(&mut rng).max(MIN_COMPUTE_DEMAND);
                    if spec.demand_per_processor {
                        demand *= f64::from(procs);
                    }
                    let input = spec.input_bytes.sample(&mut rng).max(0.0);
                    let output = spec.output_bytes.sample(&mut rng).max(0.0);
                    let exe = spec.executable_bytes.sample(&mut rng).max(0.0);
                    (procs, demand, input, output, exe)
                })
                .collect();
            drafts.push(Draft {
                time,
                owner,
                index: b,
                jobs,
                data_site: data_sites[0],
                user_site,
                dataset,
            });
        }
    }
    drafts.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then(a.owner.cmp(&b.owner))
            .then(a.index.cmp(&b.index))
    });

    let mut next_job = 0u64;
    let bursts = drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let burst = BurstId(i as u64);
            let jobs = d
                .jobs
                .into_iter()
                .map(|(procs, demand, input, output, exe)| {
                    let data = JobDataSpec {
                        input_bytes: input,
                        output_bytes: output,
                        executable_bytes: exe,
                        input_source: d.data_site,
                        output_sink: d.user_site,
                        executable_source: d.user_site,
                    };
                    let id = JobId(next_job);
                    next_job += 1;
                    Job::new(id, d.owner, burst, procs, demand, data)
                        .with_dataset(d.dataset)
                        .with_submit_time(d.time)
                })
                .collect();
            Burst {
                id: burst,
                owner: d.owner,
                time: d.time,
                jobs,
            }
        })
        .collect();
    Workload { bursts, hosting }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites(n: u32) -> Vec<SiteId> {
        (0..n).map(SiteId).collect()
    }

    fn spec() -> WorkloadSpec {
        WorkloadSpec {
            users: 2,
            bursts_per_user: 3,
            burst_size: constant(4.0),
            inter_arrival: constant(10.0),
            compute_demand: constant(100.0),
            processors_required: constant(1.0),
            input_bytes: constant(1e6),
            output_bytes: zero(),
            executable_bytes: zero(),
            data_placement: DataPlacement::SingleHome,
            user_sites: vec![],
            data_site_weights: vec![],
            start_time: 0.0,
            user_offset: 1.0,
            demand_per_processor: false,
        }
    }

    #[test]
    fn constant_workload_is_arithmetic() {
        let w = generate_workload(&spec(), &sites(2), 4, 1);
        let times: Vec<f64> = w.bursts.iter().map(|b| b.time).collect();
        assert_eq!(times, vec![0.0, 1.0, 10.0, 11.0, 20.0, 21.0]);
        let owners: Vec<u32> = w.bursts.iter().map(|b| b.owner.0).collect();
        assert_eq!(owners, vec![0, 1, 0, 1, 0, 1]);
        assert_eq!(w.job_count(), 24);
        let ids: Vec<u64> = w.bursts.iter().flat_map(|b| b.jobs.iter().map(|j| j.id.0)).collect();
        assert_eq!(ids, (0..24).collect::<Vec<_>>());
        assert!(w.bursts.iter().all(|b| b.jobs.iter().all(|j| j.burst == b.id)));
        assert_eq!(w.bursts[1].jobs[0].data.output_sink, SiteId(1));
    }

    #[test]
    fn same_seed_same_jobs() {
        let mut s = spec();
        s.inter_arrival = Distribution::Exponential { mean: 5.0 };
        s.burst_size = Distribution::Uniform { lo: 1.0, hi: 8.0 };
        s.processors_required = Distribution::Uniform { lo: 1.0, hi: 16.0 };
        let a = generate_workload(&s, &sites(3), 8, 42);
        let b = generate_workload(&s, &sites(3), 8, 42);
        assert_eq!(a, b);
        let c = generate_workload(&s, &sites(3), 8, 43);
        assert_ne!(a, c);
        assert!(a.bursts.iter().flat_map(|b| &b.jobs).all(|j| (1..=8).contains(&j.processors_required)));
    }

    #[test]
    fn exponential_sample_mean_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = Distribution::Exponential { mean: 3.5 };
        let n = 20_000;
        let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 3.5).abs() / 3.5 < 0.10, "{mean}");
    }

    #[test]
    fn replicated_hosts_k_sites() {
        let mut s = spec();
        s.data_placement = DataPlacement::Replicated { k: 3 };
        let w = generate_workload(&s, &sites(4), 4, 9);
        for u in 0..2 {
            let hosts = w.hosting.values().filter(|d| d.contains(&DatasetId(u))).count();
            assert_eq!(hosts, 3);
        }
    }

    #[test]
    fn skewed_weights_respected() {
        let mut s = spec();
        s.users = 50;
        s.data_site_weights = vec![1.0, 0.0, 0.0];
        let w = generate_workload(&s, &sites(3), 4, 3);
        assert_eq!(w.hosting.keys().copied().collect::<Vec<_>>(), vec![SiteId(0)]);
    }

    #[test]
    fn demand_scaled_by_processors() {
        let mut s = spec();
        s.processors_required = constant(3.0);
        s.demand_per_processor = true;
        let w = generate_workload(&s, &sites(1), 4, 0);
        assert!(w.bursts[0].jobs.iter().all(|j| j.compute_demand == 300.0));
    }

    #[test]
    fn violations_collected() {
        let mut s = spec();
        s.inter_arrival = constant(-1.0);
        s.compute_demand = Distribution::Uniform { lo: 5.0, hi: 1.0 };
        s.user_sites = vec![SiteId(9)];
        let v = s.violations(&sites(2));
        let paths: Vec<&str> = v.iter().map(|v| v.path.as_str()).collect();
        assert_eq!(
            paths,
            vec!["workload.inter_arrival.value", "workload.compute_demand.hi", "workload.user_sites[0]"]
        );
    }

    #[test]
    fn empty_workload() {
        let mut s = spec();
        s.users = 0;
        assert!(generate_workload(&s, &sites(2), 4, 0).bursts.is_empty());
    }
}
