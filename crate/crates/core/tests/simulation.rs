use std::collections::BTreeMap;

use diana_core::{
    compute_metrics, run, CostWeights, DataPlacement, Distribution, EventKind, EventLog, EventPayload, JobId,
    MigrationPolicy, NetworkLink, PriorityPolicy, Scenario, SchedulerKind, SiteId, SiteState, TransferPhase,
    WorkloadSpec,
};
use proptest::prelude::*;

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    (2usize..5, any::<u64>(), 0usize..3, 1u32..4, 1u32..5, 2.0..20.0f64, 0.5..40.0f64).prop_flat_map(
        |(n, seed, kind, users, bursts, size, gap)| {
            let sites = prop::collection::vec((1.0..30.0f64, 2u32..9), n);
            let links = prop::collection::vec((7.0..10.0f64, -5.0..-2.0f64, 0.005..0.2f64), n * (n - 1));
            (sites, links).prop_map(move |(sites, links)| {
                let sites: Vec<SiteState> = sites
                    .into_iter()
                    .enumerate()
                    .map(|(i, (cap, procs))| SiteState::new(SiteId(i as u32), cap, procs))
                    .collect();
                let pairs = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)));
                let topology = pairs
                    .zip(links)
                    .map(|((a, b), (bw, loss, rtt))| {
                        NetworkLink::new(SiteId(a as u32), SiteId(b as u32), 10f64.powf(bw), 10f64.powf(loss), rtt)
                    })
                    .collect();
                Scenario {
                    sites,
                    topology,
                    weights: CostWeights {
                        beta: 10.0,
                        ..CostWeights::default()
                    },
                    policy: PriorityPolicy::default(),
                    workload: WorkloadSpec {
                        users,
                        bursts_per_user: bursts,
                        burst_size: Distribution::Uniform { lo: 1.0, hi: size },
                        inter_arrival: Distribution::Exponential { mean: gap },
                        compute_demand: Distribution::Exponential { mean: 100.0 },
                        processors_required: Distribution::Uniform { lo: 1.0, hi: 2.0 },
                        input_bytes: Distribution::Uniform { lo: 0.0, hi: 1e9 },
                        output_bytes: Distribution::Constant { value: 1e7 },
                        executable_bytes: Distribution::Constant { value: 1e6 },
                        data_placement: DataPlacement::SingleHome,
                        user_sites: vec![],
                        data_site_weights: vec![],
                        start_time: 0.0,
                        user_offset: 3.0,
                        demand_per_processor: false,
                    },
                    scheduler_kind: [SchedulerKind::Diana, SchedulerKind::GreedyCompute, SchedulerKind::Random][kind],
                    duration: 1e8,
                    seed,
                    aging_tick: None,
                    estimate_window: 60.0,
                    migration: MigrationPolicy {
                        enabled: Some(true),
                        overload_factor: 1.0,
                    },
                }
            })
        },
    )
}

fn processors_by_site(log: &EventLog) -> BTreeMap<SiteId, u32> {
    match &log.events[0].payload {
        EventPayload::Start { sites } => sites.iter().map(|s| (s.id, s.processors)).collect(),
        other => panic!("log starts with {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_is_ordered_and_capacity_respected(s in scenario_strategy()) {
        let log = run(&s).unwrap();
        for pair in log.events.windows(2) {
            prop_assert!(pair[1].seq > pair[0].seq);
            prop_assert!(pair[1].time >= pair[0].time);
        }
        let capacity = processors_by_site(&log);
        let mut busy: BTreeMap<SiteId, u32> = BTreeMap::new();
        for e in &log.events {
            let EventPayload::Exec { processors, .. } = e.payload else { continue };
            let site = e.site.unwrap();
            let used = busy.entry(site).or_default();
            match e.kind {
                EventKind::ExecStart => *used += processors,
                EventKind::ExecEnd => *used -= processors,
                _ => {}
            }
            prop_assert!(*used <= capacity[&site], "{site:?} over capacity at t={}", e.time);
        }
        prop_assert!(busy.values().all(|&u| u == 0));
    }

    #[test]
    fn each_job_follows_its_lifecycle(s in scenario_strategy()) {
        let log = run(&s).unwrap();
        let mut per_job: BTreeMap<JobId, Vec<&diana_core::SimEvent>> = BTreeMap::new();
        for e in &log.events {
            if let Some(j) = e.job {
                per_job.entry(j).or_default().push(e);
            }
        }
        for (job, events) in &per_job {
            prop_assert_eq!(events[0].kind, EventKind::Arrival, "{:?}", job);
            let find = |k| events.iter().filter(|e| e.kind == k).collect::<Vec<_>>();
            let (starts, ends) = (find(EventKind::ExecStart), find(EventKind::ExecEnd));
            prop_assert_eq!(starts.len(), 1);
            prop_assert_eq!(ends.len(), 1);
            let (start, end) = (starts[0], ends[0]);
            prop_assert_eq!(start.site, end.site);
            if let EventPayload::Exec { service_time, .. } = end.payload {
                prop_assert!((end.time - start.time - service_time).abs() <= 1e-9 * end.time.max(1.0));
            }
            // the last queue entry happens at the executing site, after any export
            let enqueue = events.iter().rev().find(|e| e.kind == EventKind::Enqueue && e.time <= start.time).unwrap();
            prop_assert_eq!(enqueue.site, start.site);
            let is_stage_in = |e: &&&diana_core::SimEvent| {
                e.kind == EventKind::TransferEnd
                    && matches!(e.payload, EventPayload::Transfer { phase: TransferPhase::StageIn, .. })
            };
            let stage_in = events.iter().find(is_stage_in).unwrap();
            prop_assert!(enqueue.time <= stage_in.time && stage_in.time <= start.time);
            let last = events.last().unwrap();
            prop_assert!(last.time >= end.time);
            let shipped = matches!(last.payload, EventPayload::Transfer { phase: TransferPhase::StageOut, .. });
            prop_assert!(shipped, "{:?} ends with {:?}", job, last.kind);
        }
        let summary = compute_metrics(&log).unwrap();
        prop_assert_eq!(summary.completed, summary.submitted);
        prop_assert_eq!(per_job.len(), summary.submitted);
    }

    #[test]
    fn runs_repeat_exactly(s in scenario_strategy()) {
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        prop_assert_eq!(format!("{:?}", a.events), format!("{:?}", b.events));
    }

    #[test]
    fn summary_identities_hold(s in scenario_strategy()) {
        let m = compute_metrics(&run(&s).unwrap()).unwrap();
        if m.completed == 0 {
            return Ok(());
        }
        prop_assert!(m.mean_waiting <= m.mean_response + 1e-9);
        prop_assert!(m.mean_response <= m.mean_turnaround + 1e-9);
        prop_assert!(m.median_turnaround <= m.p95_turnaround);
        prop_assert!((m.throughput * m.makespan - m.completed as f64).abs() <= 1e-9 * m.completed as f64);
        prop_assert_eq!(m.jobs_local + m.jobs_migrated, m.completed);
        for &u in m.cpu_utilization.values() {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&u));
        }
    }

    #[test]
    fn exports_lower_cost_and_bursts_share_a_site(s in scenario_strategy()) {
        let log = run(&s).unwrap();
        let mut burst_site: BTreeMap<u64, SiteId> = BTreeMap::new();
        for e in &log.events {
            match e.payload {
                EventPayload::Export { local_cost, remote_cost, from, to } => {
                    prop_assert!(remote_cost < local_cost);
                    prop_assert_ne!(from, to);
                }
                EventPayload::Placement { burst, .. } => {
                    let site = e.site.unwrap();
                    prop_assert_eq!(*burst_site.entry(burst.0).or_insert(site), site);
                }
                _ => {}
            }
        }
    }
}
