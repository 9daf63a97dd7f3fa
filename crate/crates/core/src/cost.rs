//! Site placement costs.
//!
//! A job placed at a candidate site is priced along three axes:
//!
//! * **network**: `loss_prob / bandwidth` of the input-data link, scaled by a
//!   reference bandwidth so the value is a dimensionless penalty;
//! * **compute**: `(Q/P)·w5 + (Q/P)·w6 + load·w7` from the site's waiting
//!   queue length `Q`, capability `P` and current load;
//! * **data transfer (DTC)**: the time to move input, output and executable
//!   data, each leg at the achievable TCP rate of its link.
//!
//! The achievable TCP rate follows the macroscopic congestion-avoidance model
//! `MSS·C / (RTT·sqrt(loss))` with `C = sqrt(3/2)`, capped at the link
//! bandwidth. The total is `alpha·network + beta·compute + gamma·dtc`.
//!
//! Everything here is a pure function.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{DatasetId, SiteId};

/// `sqrt(3/2)`, the constant of the macroscopic TCP throughput model.
pub const MATHIS_CONSTANT: f64 = 1.224_744_871_391_589;

/// Default TCP maximum segment size in bytes.
pub const DEFAULT_MSS: u32 = 1460;

/// Default reference bandwidth (bits/s) used to normalise network cost.
pub const DEFAULT_REFERENCE_BANDWIDTH: f64 = 1e8;

/// Default lower bound applied to configured loss probabilities.
pub const DEFAULT_MIN_LOSS_PROB: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("invalid link {src}->{dst}: {reason}")]
    InvalidLink {
        src: SiteId,
        dst: SiteId,
        reason: &'static str,
    },
    #[error("invalid site {site}: {reason}")]
    InvalidSite { site: SiteId, reason: &'static str },
    #[error("no route from {src} to {dst}")]
    UnknownRoute { src: SiteId, dst: SiteId },
    #[error("{component} cost: {source}")]
    Component {
        component: CostComponent,
        source: Box<CostError>,
    },
}

/// Which term of the total cost failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostComponent {
    Network,
    Compute,
    DataTransfer,
}

impl fmt::Display for CostComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostComponent::Network => "network",
            CostComponent::Compute => "compute",
            CostComponent::DataTransfer => "data transfer",
        })
    }
}

impl CostError {
    fn in_component(self, component: CostComponent) -> Self {
        CostError::Component {
            component,
            source: Box::new(self),
        }
    }
}

fn default_mss() -> u32 {
    DEFAULT_MSS
}

/// Directed link statistics between two sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLink {
    pub src: SiteId,
    pub dst: SiteId,
    /// Physical bandwidth in bits/s.
    pub bandwidth: f64,
    /// Packet loss probability in (0, 1].
    pub loss_prob: f64,
    /// Round-trip time in seconds.
    pub rtt: f64,
    /// Maximum segment size in bytes.
    #[serde(default = "default_mss")]
    pub mss: u32,
}

impl NetworkLink {
    pub fn new(src: SiteId, dst: SiteId, bandwidth: f64, loss_prob: f64, rtt: f64) -> Self {
        Self {
            src,
            dst,
            bandwidth,
            loss_prob,
            rtt,
            mss: DEFAULT_MSS,
        }
    }

    pub fn is_self_link(&self) -> bool {
        self.src == self.dst
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let bad = |reason| {
            Err(CostError::InvalidLink {
                src: self.src,
                dst: self.dst,
                reason,
            })
        };
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return bad("bandwidth must be finite and > 0");
        }
        if !(self.rtt.is_finite() && self.rtt > 0.0) {
            return bad("rtt must be finite and > 0");
        }
        if !(self.loss_prob.is_finite() && self.loss_prob > 0.0 && self.loss_prob <= 1.0) {
            return bad("loss_prob must lie in (0, 1]");
        }
        if self.mss == 0 {
            return bad("mss must be > 0");
        }
        Ok(())
    }
}

/// A grid site as seen by the cost model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteState {
    pub id: SiteId,
    /// Per-processor computing capability in work units per second.
    pub capability: f64,
    /// Number of jobs waiting in the site's queues.
    #[serde(default)]
    pub queue_length: usize,
    /// Fraction of processors currently allocated.
    #[serde(default)]
    pub load: f64,
    pub processors: u32,
    #[serde(default)]
    pub hosted_data: BTreeSet<DatasetId>,
}

impl SiteState {
    pub fn new(id: SiteId, capability: f64, processors: u32) -> Self {
        Self {
            id,
            capability,
            queue_length: 0,
            load: 0.0,
            processors,
            hosted_data: BTreeSet::new(),
        }
    }

    pub fn hosts(&self, dataset: DatasetId) -> bool {
        self.hosted_data.contains(&dataset)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let bad = |reason| {
            Err(CostError::InvalidSite {
                site: self.id,
                reason,
            })
        };
        if !(self.capability.is_finite() && self.capability > 0.0) {
            return bad("capability must be finite and > 0");
        }
        if !(self.load.is_finite() && (0.0..=1.0).contains(&self.load)) {
            return bad("load must lie in [0, 1]");
        }
        if self.processors == 0 {
            return bad("processors must be >= 1");
        }
        Ok(())
    }
}

/// Weights combining the three cost terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    pub w5: f64,
    pub w6: f64,
    pub w7: f64,
    /// Scale of the network term.
    pub alpha: f64,
    /// Scale of the compute term.
    pub beta: f64,
    /// Scale of the data-transfer term.
    pub gamma: f64,
    /// Bandwidth (bits/s) at which a link's network cost equals its loss.
    pub reference_bandwidth: f64,
    /// Loss probabilities below this are raised to it when a scenario is loaded.
    pub min_loss_prob: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            w5: 0.5,
            w6: 0.5,
            w7: 1.0,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            reference_bandwidth: DEFAULT_REFERENCE_BANDWIDTH,
            min_loss_prob: DEFAULT_MIN_LOSS_PROB,
        }
    }
}

impl CostWeights {
    /// Returns `(field, problem)` for every violated constraint.
    pub fn violations(&self) -> Vec<(&'static str, &'static str)> {
        let mut out = Vec::new();
        for (name, v) in [
            ("w5", self.w5),
            ("w6", self.w6),
            ("w7", self.w7),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                out.push((name, "must be finite and >= 0"));
            }
        }
        if !(self.alpha > 0.0 || self.beta > 0.0 || self.gamma > 0.0) {
            out.push(("alpha", "at least one of alpha, beta, gamma must be > 0"));
        }
        if !(self.reference_bandwidth.is_finite() && self.reference_bandwidth > 0.0) {
            out.push(("reference_bandwidth", "must be finite and > 0"));
        }
        if !(self.min_loss_prob.is_finite() && self.min_loss_prob > 0.0 && self.min_loss_prob <= 1.0) {
            out.push(("min_loss_prob", "must lie in (0, 1]"));
        }
        out
    }
}

/// Data a job moves: where it comes from, where results go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobDataSpec {
    pub input_bytes: f64,
    pub output_bytes: f64,
    pub executable_bytes: f64,
    pub input_source: SiteId,
    pub output_sink: SiteId,
    pub executable_source: SiteId,
}

impl JobDataSpec {
    /// A job with no data to move whose user sits at `site`.
    pub fn local(site: SiteId) -> Self {
        Self {
            input_bytes: 0.0,
            output_bytes: 0.0,
            executable_bytes: 0.0,
            input_source: site,
            output_sink: site,
            executable_source: site,
        }
    }
}

/// Per-term costs of one placement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub network: f64,
    pub compute: f64,
    pub dtc: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(network: f64, compute: f64, dtc: f64, w: &CostWeights) -> Self {
        Self {
            network,
            compute,
            dtc,
            total: w.alpha * network + w.beta * compute + w.gamma * dtc,
        }
    }

    /// Component-wise sum, used to price a whole burst.
    pub fn accumulate(&mut self, other: &CostBreakdown) {
        self.network += other.network;
        self.compute += other.compute;
        self.dtc += other.dtc;
        self.total += other.total;
    }
}

/// Route between two sites: either local, or over a link of the topology.
#[derive(Debug, Clone, Copy)]
pub enum Route<'a> {
    Local,
    Link(&'a NetworkLink),
}

/// Link table keyed by ordered `(src, dst)` pairs. Self-links are implicit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<NetworkLink>", into = "Vec<NetworkLink>")]
pub struct Topology {
    links: BTreeMap<(SiteId, SiteId), NetworkLink>,
}

impl From<Vec<NetworkLink>> for Topology {
    fn from(links: Vec<NetworkLink>) -> Self {
        links.into_iter().collect()
    }
}

impl From<Topology> for Vec<NetworkLink> {
    fn from(t: Topology) -> Self {
        t.links.into_values().collect()
    }
}

impl FromIterator<NetworkLink> for Topology {
    fn from_iter<I: IntoIterator<Item = NetworkLink>>(iter: I) -> Self {
        let mut t = Topology::default();
        for link in iter {
            t.insert(link);
        }
        t
    }
}

impl Topology {
    /// Inserts a link, replacing any previous one for the same pair.
    pub fn insert(&mut self, link: NetworkLink) -> Option<NetworkLink> {
        self.links.insert((link.src, link.dst), link)
    }

    pub fn get(&self, src: SiteId, dst: SiteId) -> Option<&NetworkLink> {
        self.links.get(&(src, dst))
    }

    pub fn route(&self, src: SiteId, dst: SiteId) -> Result<Route<'_>, CostError> {
        if src == dst {
            return Ok(Route::Local);
        }
        self.get(src, dst)
            .map(Route::Link)
            .ok_or(CostError::UnknownRoute { src, dst })
    }

    pub fn links(&self) -> impl Iterator<Item = &NetworkLink> {
        self.links.values()
    }

    pub fn links_mut(&mut self) -> impl Iterator<Item = &mut NetworkLink> {
        self.links.values_mut()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Achievable TCP rate in bits/s over `link`, never above its bandwidth.
pub fn tcp_throughput(link: &NetworkLink) -> Result<f64, CostError> {
    link.validate()?;
    let mss_bits = f64::from(link.mss) * 8.0;
    let mathis = mss_bits * MATHIS_CONSTANT / (link.rtt * link.loss_prob.sqrt());
    Ok(mathis.min(link.bandwidth))
}

/// Loss over bandwidth, scaled by `reference_bandwidth`. Zero for a self-link.
pub fn network_cost(link: &NetworkLink, reference_bandwidth: f64) -> Result<f64, CostError> {
    if link.is_self_link() {
        return Ok(0.0);
    }
    link.validate()?;
    Ok(link.loss_prob / link.bandwidth * reference_bandwidth)
}

pub fn compute_cost(site: &SiteState, w: &CostWeights) -> Result<f64, CostError> {
    site.validate()?;
    let queue_per_capability = site.queue_length as f64 / site.capability;
    Ok(queue_per_capability * w.w5 + queue_per_capability * w.w6 + site.load * w.w7)
}

/// Seconds needed to move `bytes` over `link`. Zero for a self-link or no data.
pub fn transfer_time(bytes: f64, link: &NetworkLink) -> Result<f64, CostError> {
    if link.is_self_link() {
        return Ok(0.0);
    }
    let rate = tcp_throughput(link)?;
    if bytes == 0.0 {
        return Ok(0.0);
    }
    Ok(bytes * 8.0 / rate)
}

fn leg_time(bytes: f64, route: Route<'_>) -> Result<f64, CostError> {
    match route {
        Route::Local => Ok(0.0),
        Route::Link(link) => transfer_time(bytes, link),
    }
}

/// Input and executable legs: the data that must arrive before execution.
pub fn stage_in_time(job: &JobDataSpec, candidate: SiteId, topology: &Topology) -> Result<f64, CostError> {
    let input = leg_time(job.input_bytes, topology.route(job.input_source, candidate)?)?;
    let exe = leg_time(job.executable_bytes, topology.route(job.executable_source, candidate)?)?;
    Ok(input + exe)
}

/// Output leg: results shipped back to the user after execution.
pub fn stage_out_time(job: &JobDataSpec, candidate: SiteId, topology: &Topology) -> Result<f64, CostError> {
    leg_time(job.output_bytes, topology.route(candidate, job.output_sink)?)
}

pub fn data_transfer_cost(job: &JobDataSpec, candidate: SiteId, topology: &Topology) -> Result<f64, CostError> {
    let input = leg_time(job.input_bytes, topology.route(job.input_source, candidate)?)?;
    let output = leg_time(job.output_bytes, topology.route(candidate, job.output_sink)?)?;
    let exe = leg_time(job.executable_bytes, topology.route(job.executable_source, candidate)?)?;
    Ok(input + output + exe)
}

/// Prices `job` at `site`. The network term uses the input-data link.
pub fn total_cost(
    job: &JobDataSpec,
    site: &SiteState,
    topology: &Topology,
    w: &CostWeights,
) -> Result<CostBreakdown, CostError> {
    let network = match topology
        .route(job.input_source, site.id)
        .map_err(|e| e.in_component(CostComponent::Network))?
    {
        Route::Local => 0.0,
        Route::Link(link) => {
            network_cost(link, w.reference_bandwidth).map_err(|e| e.in_component(CostComponent::Network))?
        }
    };
    let compute = compute_cost(site, w).map_err(|e| e.in_component(CostComponent::Compute))?;
    let dtc =
        data_transfer_cost(job, site.id, topology).map_err(|e| e.in_component(CostComponent::DataTransfer))?;
    Ok(CostBreakdown::new(network, compute, dtc, w))
}
