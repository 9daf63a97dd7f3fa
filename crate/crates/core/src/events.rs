//! Simulation event log.
//!
//! Every state change of a run is recorded as a [`SimEvent`]. Metrics,
//! arrival-rate estimates and golden-file tests are all derived from the log,
//! so payloads carry whatever those consumers need.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::CostBreakdown;
use crate::ids::{BurstId, JobId, SiteId, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Start,
    Arrival,
    Placement,
    Enqueue,
    TransferStart,
    TransferEnd,
    ExecStart,
    ExecEnd,
    Promotion,
    Demotion,
    Export,
    Warning,
    End,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::Arrival => "arrival",
            EventKind::Placement => "placement",
            EventKind::Enqueue => "enqueue",
            EventKind::TransferStart => "transfer_start",
            EventKind::TransferEnd => "transfer_end",
            EventKind::ExecStart => "exec_start",
            EventKind::ExecEnd => "exec_end",
            EventKind::Promotion => "promotion",
            EventKind::Demotion => "demotion",
            EventKind::Export => "export",
            EventKind::Warning => "warning",
            EventKind::End => "end",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stage-in moves input and executable before execution; stage-out ships output after.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferPhase {
    StageIn,
    StageOut,
}

/// Static description of a site, recorded once at the start of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteInfo {
    pub id: SiteId,
    pub processors: u32,
    pub capability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventPayload {
    None,
    Start {
        sites: Vec<SiteInfo>,
    },
    Arrival {
        owner: UserId,
        burst: BurstId,
        processors_required: u32,
        compute_demand: f64,
    },
    Placement {
        burst: BurstId,
        cost: CostBreakdown,
    },
    Enqueue {
        level: usize,
        migrated: bool,
    },
    Transfer {
        phase: TransferPhase,
        duration: f64,
        /// Seconds spent in this site's queues before stage-in began.
        queue_wait: f64,
    },
    Exec {
        service_time: f64,
        processors: u32,
    },
    Level {
        from: usize,
        to: usize,
    },
    Export {
        from: SiteId,
        to: SiteId,
        local_cost: f64,
        remote_cost: f64,
    },
    Warning {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub seq: u64,
    pub time: f64,
    pub kind: EventKind,
    pub job: Option<JobId>,
    pub site: Option<SiteId>,
    pub payload: EventPayload,
}

impl SimEvent {
    /// Compact `key=value;...` rendering of the payload for tabular output.
    pub fn detail(&self) -> String {
        match &self.payload {
            EventPayload::None => String::new(),
            EventPayload::Start { sites } => sites
                .iter()
                .map(|s| format!("site={}:processors={}:capability={}", s.id.0, s.processors, s.capability))
                .collect::<Vec<_>>()
                .join(";"),
            EventPayload::Arrival {
                owner,
                burst,
                processors_required,
                compute_demand,
            } => format!(
                "owner={};burst={};processors={};demand={}",
                owner.0, burst.0, processors_required, compute_demand
            ),
            EventPayload::Placement { burst, cost } => format!(
                "burst={};network={};compute={};dtc={};total={}",
                burst.0, cost.network, cost.compute, cost.dtc, cost.total
            ),
            EventPayload::Enqueue { level, migrated } => format!("level={level};migrated={migrated}"),
            EventPayload::Transfer {
                phase,
                duration,
                queue_wait,
            } => {
                let phase = match phase {
                    TransferPhase::StageIn => "stage_in",
                    TransferPhase::StageOut => "stage_out",
                };
                format!("phase={phase};duration={duration};queue_wait={queue_wait}")
            }
            EventPayload::Exec {
                service_time,
                processors,
            } => format!("service_time={service_time};processors={processors}"),
            EventPayload::Level { from, to } => format!("from={from};to={to}"),
            EventPayload::Export {
                from,
                to,
                local_cost,
                remote_cost,
            } => format!("from={};to={};local_cost={local_cost};remote_cost={remote_cost}", from.0, to.0),
            EventPayload::Warning { message } => format!("message={}", message.replace([',', ';', '\n'], " ")),
        }
    }
}

/// Events in processing order; `seq` is the index of each event.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub events: Vec<SimEvent>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, kind: EventKind, job: Option<JobId>, site: Option<SiteId>, payload: EventPayload) {
        let seq = self.events.len() as u64;
        self.events.push(SimEvent {
            seq,
            time,
            kind,
            job,
            site,
            payload,
        });
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SimEvent> {
        self.events.iter()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &SimEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Events with `from <= time <= to`, found by binary search.
    pub fn between(&self, from: f64, to: f64) -> &[SimEvent] {
        let lo = self.events.partition_point(|e| e.time < from);
        let hi = self.events.partition_point(|e| e.time <= to);
        if lo >= hi {
            &[]
        } else {
            &self.events[lo..hi]
        }
    }

    pub fn sites(&self) -> &[SiteInfo] {
        self.events
            .iter()
            .find_map(|e| match &e.payload {
                EventPayload::Start { sites } => Some(sites.as_slice()),
                _ => None,
            })
            .unwrap_or(&[])
    }
}

impl<'a> IntoIterator for &'a EventLog {
    type Item = &'a SimEvent;
    type IntoIter = std::slice::Iter<'a, SimEvent>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}
