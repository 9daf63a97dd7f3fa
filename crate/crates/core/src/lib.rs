//! Data-intensive, network-aware grid meta-scheduling.
//!
//! The crate is organised bottom-up:
//!
//! * [`cost`] prices a job at a candidate site from network, computation and
//!   data-transfer costs.
//! * [`queues`] holds the per-site multilevel feedback queues with
//!   frequency-based demotion and aging-based promotion.
//! * [`scheduler`] picks sites for bursts, detects overload with Little's
//!   formula and decides one-hop job exports.
//! * [`sim`] and [`workload`] drive everything from a [`Scenario`] through a
//!   deterministic discrete-event loop that produces an [`EventLog`].
//! * [`metrics`] turns event logs into throughput, turnaround, waiting,
//!   response, utilisation and plot-ready series.

pub mod cost;
pub mod events;
pub mod ids;
pub mod metrics;
pub mod queues;
pub mod scenario;
pub mod scheduler;
pub mod sim;
pub mod workload;

pub use cost::{
    compute_cost, data_transfer_cost, network_cost, tcp_throughput, total_cost, transfer_time,
    CostBreakdown, CostError, CostWeights, JobDataSpec, NetworkLink, SiteState, Topology,
};
pub use events::{EventKind, EventLog, EventPayload, SimEvent, TransferPhase};
pub use ids::{BurstId, DatasetId, JobId, SiteId, UserId};
pub use metrics::{
    compute_metrics, exec_time_vs_job_count, littles_residual, repeated_exports, series, waits, MetricsError,
    MetricsSummary, SeriesKind, SeriesTable,
};
pub use queues::{effective_priority, FeedbackQueues, Job, JobState, PriorityPolicy, QueueError, UserStats};
pub use scenario::{MigrationPolicy, Scenario, ValidationErrors, Violation};
pub use scheduler::{
    estimate_arrivals, export_jobs, littles_formula, select_site, should_export, GridView,
    LittleEstimate, LittleQuery, Placement, SchedulerError, SchedulerKind,
};
pub use sim::{job_service_time, run, SimError};
pub use workload::{generate_workload, Burst, DataPlacement, Distribution, Workload, WorkloadSpec};
