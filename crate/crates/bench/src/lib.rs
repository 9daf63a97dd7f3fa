//! Random grids and bursts for the benchmarks.

use diana_core::{
    BurstId, CostWeights, GridView, Job, JobDataSpec, JobId, NetworkLink, SiteId, SiteState, Topology, UserId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `sites` sites, full mesh, with loads and queues drawn from `seed`.
pub fn random_grid(sites: u32, seed: u64) -> GridView {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..sites)
        .map(|i| {
            let mut s = SiteState::new(SiteId(i), rng.random_range(1.0..40.0), rng.random_range(2..64));
            s.queue_length = rng.random_range(0..200);
            s.load = rng.random_range(0.0..1.0);
            s
        })
        .collect();
    let mut topology = Topology::default();
    for a in 0..sites {
        for b in (0..sites).filter(|&b| b != a) {
            topology.insert(NetworkLink::new(
                SiteId(a),
                SiteId(b),
                10f64.powf(rng.random_range(7.0..10.0)),
                10f64.powf(rng.random_range(-5.0..-2.0)),
                rng.random_range(0.005..0.3),
            ));
        }
    }
    GridView::new(states, topology, CostWeights::default())
}

/// One burst of `size` single-processor jobs whose data lives at a random site.
pub fn random_burst(size: u64, sites: u32, seed: u64) -> Vec<Job> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let home = SiteId(rng.random_range(0..sites));
    (0..size)
        .map(|i| {
            let data = JobDataSpec {
                input_bytes: rng.random_range(1e6..1e10),
                output_bytes: 1e7,
                executable_bytes: 1e6,
                input_source: home,
                output_sink: home,
                executable_source: home,
            };
            Job::new(JobId(i), UserId(0), BurstId(0), 1, rng.random_range(10.0..1000.0), data)
        })
        .collect()
}
