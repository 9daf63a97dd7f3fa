//! Scenario description and validation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::{CostWeights, NetworkLink, SiteState, Topology};
use crate::ids::SiteId;
use crate::queues::PriorityPolicy;
use crate::scheduler::{SchedulerKind, DEFAULT_OVERLOAD_FACTOR};
use crate::workload::WorkloadSpec;

/// One constraint violation, addressed by its field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<Violation>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MigrationPolicy {
    /// Defaults to on for the cost-based scheduler and off for the baselines.
    pub enabled: Option<bool>,
    /// Queue-length guard: overloaded past `processors · overload_factor` waiting jobs.
    pub overload_factor: f64,
}

impl Default for MigrationPolicy {
    fn default() -> Self {
        Self {
            enabled: None,
            overload_factor: DEFAULT_OVERLOAD_FACTOR,
        }
    }
}

fn default_estimate_window() -> f64 {
    60.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub sites: Vec<SiteState>,
    pub topology: Vec<NetworkLink>,
    #[serde(default)]
    pub weights: CostWeights,
    #[serde(default)]
    pub policy: PriorityPolicy,
    pub workload: WorkloadSpec,
    #[serde(default)]
    pub scheduler_kind: SchedulerKind,
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    /// Seconds between aging passes; a quarter of `policy.time_threshold` when unset.
    #[serde(default)]
    pub aging_tick: Option<f64>,
    /// Look-back window of the arrival-rate estimate, seconds.
    #[serde(default = "default_estimate_window")]
    pub estimate_window: f64,
    #[serde(default)]
    pub migration: MigrationPolicy,
}

impl Scenario {
    pub fn aging_tick(&self) -> f64 {
        self.aging_tick.unwrap_or(self.policy.time_threshold / 4.0)
    }

    pub fn migration_enabled(&self) -> bool {
        self.migration
            .enabled
            .unwrap_or(self.scheduler_kind == SchedulerKind::Diana)
    }

    pub fn site_ids(&self) -> Vec<SiteId> {
        let ids: BTreeSet<SiteId> = self.sites.iter().map(|s| s.id).collect();
        ids.into_iter().collect()
    }

    pub fn topology(&self) -> Topology {
        self.topology.iter().cloned().collect()
    }

    /// Every violated constraint, in field order.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.sites.is_empty() {
            out.push(Violation::new("sites", "at least one site is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, site) in self.sites.iter().enumerate() {
            let p = |f: &str| format!("sites[{i}].{f}");
            if !seen.insert(site.id) {
                out.push(Violation::new(p("id"), format!("duplicate site id {}", site.id.0)));
            }
            if !(site.capability.is_finite() && site.capability > 0.0) {
                out.push(Violation::new(p("capability"), "must be finite and > 0"));
            }
            if !(site.load.is_finite() && (0.0..=1.0).contains(&site.load)) {
                out.push(Violation::new(p("load"), "must lie in [0, 1]"));
            }
            if site.processors == 0 {
                out.push(Violation::new(p("processors"), "must be >= 1"));
            }
        }

        let mut pairs = BTreeSet::new();
        for (i, link) in self.topology.iter().enumerate() {
            let p = |f: &str| format!("topology[{i}].{f}");
            for (field, id) in [("src", link.src), ("dst", link.dst)] {
                if !seen.contains(&id) {
                    out.push(Violation::new(p(field), format!("unknown site {}", id.0)));
                }
            }
            if link.src == link.dst {
                out.push(Violation::new(p("dst"), "self-links are implicit and must not be listed"));
            } else if !pairs.insert((link.src, link.dst)) {
                out.push(Violation::new(p("dst"), "duplicate link"));
            }
            if !(link.bandwidth.is_finite() && link.bandwidth > 0.0) {
                out.push(Violation::new(p("bandwidth"), "must be finite and > 0"));
            }
            if !(link.rtt.is_finite() && link.rtt > 0.0) {
                out.push(Violation::new(p("rtt"), "must be finite and > 0"));
            }
            if !(link.loss_prob.is_finite() && (0.0..=1.0).contains(&link.loss_prob)) {
                out.push(Violation::new(p("loss_prob"), "must lie in [0, 1]"));
            }
            if link.mss == 0 {
                out.push(Violation::new(p("mss"), "must be > 0"));
            }
        }
        for a in &seen {
            for b in &seen {
                if a != b && !pairs.contains(&(*a, *b)) {
                    out.push(Violation::new("topology", format!("missing link {} -> {}", a.0, b.0)));
                }
            }
        }

        for (field, msg) in self.weights.violations() {
            out.push(Violation::new(format!("weights.{field}"), msg));
        }
        for (field, msg) in self.policy.violations() {
            out.push(Violation::new(format!("policy.{field}"), msg));
        }
        out.extend(self.workload.violations(&self.site_ids()));

        if !(self.duration.is_finite() && self.duration > 0.0) {
            out.push(Violation::new("duration", "must be finite and > 0"));
        }
        if let Some(t) = self.aging_tick {
            if !(t.is_finite() && t > 0.0) {
                out.push(Violation::new("aging_tick", "must be finite and > 0"));
            }
        }
        if !(self.estimate_window.is_finite() && self.estimate_window > 0.0) {
            out.push(Violation::new("estimate_window", "must be finite and > 0"));
        }
        if !(self.migration.overload_factor.is_finite() && self.migration.overload_factor > 0.0) {
            out.push(Violation::new("migration.overload_factor", "must be finite and > 0"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ValidationErrors> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ValidationErrors(v))
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::two_sites;
    use super::*;

    #[test]
    fn fixture_is_valid() {
        assert_eq!(two_sites().validate(), Ok(()));
    }

    #[test]
    fn negative_bandwidth_names_field() {
        let mut s = two_sites();
        s.topology[1].bandwidth = -5.0;
        let err = s.validate().unwrap_err();
        assert_eq!(err.0, vec![Violation::new("topology[1].bandwidth", "must be finite and > 0")]);
    }

    #[test]
    fn all_violations_reported() {
        let mut s = two_sites();
        s.topology[0].bandwidth = 0.0;
        s.duration = 0.0;
        s.policy.base_level = 7;
        let paths: Vec<String> = s.violations().into_iter().map(|v| v.path).collect();
        assert_eq!(paths, vec!["topology[0].bandwidth", "policy.base_level", "duration"]);
    }

    #[test]
    fn missing_link_reported() {
        let mut s = two_sites();
        s.topology.pop();
        let v = s.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].message, "missing link 1 -> 0");
    }

    #[test]
    fn zero_loss_is_accepted_for_clamping() {
        let mut s = two_sites();
        s.topology[0].loss_prob = 0.0;
        assert!(s.validate().is_ok());
        s.topology[0].loss_prob = -0.1;
        assert!(s.validate().is_err());
    }

    #[test]
    fn migration_defaults_follow_scheduler() {
        let mut s = two_sites();
        assert!(s.migration_enabled());
        s.scheduler_kind = SchedulerKind::GreedyCompute;
        assert!(!s.migration_enabled());
        s.migration.enabled = Some(true);
        assert!(s.migration_enabled());
        assert_eq!(s.aging_tick(), 15.0);
    }
}
