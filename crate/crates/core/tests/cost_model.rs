use diana_core::{
    compute_cost, data_transfer_cost, network_cost, tcp_throughput, total_cost, transfer_time, CostWeights,
    JobDataSpec, NetworkLink, SiteId, SiteState, Topology,
};
use proptest::prelude::*;

fn s(i: u32) -> SiteId {
    SiteId(i)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

// Evaluated by hand: 1460 * 8 = 11680 bits; 11680 * sqrt(1.5) = 14305.0201;
// rtt * sqrt(loss) = 0.05 * 0.01 = 0.0005; 14305.0201 / 0.0005 = 2.86100402e7.
const HAND_THROUGHPUT: f64 = 2.861_004_02e7;
// 1 GB = 8e9 bits; 8e9 / 2.86100402e7 = 279.6221 s.
const HAND_GIGABYTE_SECONDS: f64 = 279.6221;

#[test]
fn mathis_rate_matches_hand_evaluation() {
    let link = NetworkLink::new(s(0), s(1), 1e9, 1e-4, 0.05);
    let rate = tcp_throughput(&link).unwrap();
    assert!(close(rate, HAND_THROUGHPUT, 1e-8), "{rate}");
    let t = transfer_time(1e9, &link).unwrap();
    assert!(close(t, HAND_GIGABYTE_SECONDS, 1e-6), "{t}");
}

/// Three sites with distinct links; every leg crosses a different one.
fn three_sites() -> Topology {
    let mut t = Topology::default();
    t.insert(NetworkLink::new(s(0), s(1), 1e9, 1e-4, 0.05));
    t.insert(NetworkLink::new(s(1), s(0), 1e9, 1e-4, 0.05));
    // Mathis rate 14305.0201 / (0.1 * 0.001) = 1.43e8 > 1e8: capped at bandwidth
    t.insert(NetworkLink::new(s(2), s(1), 1e8, 1e-6, 0.1));
    t.insert(NetworkLink::new(s(1), s(2), 5e8, 1e-2, 0.2));
    t.insert(NetworkLink::new(s(0), s(2), 1e9, 1e-3, 0.02));
    t.insert(NetworkLink::new(s(2), s(0), 1e9, 1e-3, 0.02));
    t
}

#[test]
fn three_site_legs_sum_independently() {
    let job = JobDataSpec {
        input_bytes: 1e9,
        output_bytes: 2e8,
        executable_bytes: 5e7,
        input_source: s(0),
        output_sink: s(2),
        executable_source: s(2),
    };
    // input 0->1 at 2.86100402e7 bit/s: 8e9 / 2.86100402e7 = 279.6221 s
    // output 1->2, Mathis 14305.0201 / (0.2 * 0.1) = 715251.0 bit/s: 1.6e9 / 715251.0 = 2236.978 s
    // executable 2->1 capped at 1e8 bit/s: 4e8 / 1e8 = 4 s
    let expected = 279.6221 + 2236.978 + 4.0;
    let dtc = data_transfer_cost(&job, s(1), &three_sites()).unwrap();
    assert!(close(dtc, expected, 1e-6), "{dtc} vs {expected}");

    let mut site = SiteState::new(s(1), 4.0, 8);
    site.queue_length = 20;
    site.load = 0.8;
    let w = CostWeights {
        w5: 1.0,
        w6: 0.5,
        w7: 2.0,
        alpha: 2.0,
        beta: 3.0,
        gamma: 0.5,
        ..CostWeights::default()
    };
    let b = total_cost(&job, &site, &three_sites(), &w).unwrap();
    // network: input link loss 1e-4 / 1e9 * 1e8 = 1e-5; compute: 5 + 2.5 + 1.6 = 9.1
    assert!(close(b.network, 1e-5, 1e-12));
    assert!(close(b.compute, 9.1, 1e-12));
    let total = 2.0 * 1e-5 + 3.0 * 9.1 + 0.5 * expected;
    assert!(close(b.total, total, 1e-6), "{} vs {total}", b.total);
}

#[test]
fn compute_cost_spot_values() {
    let mut site = SiteState::new(s(0), 4.0, 1);
    site.queue_length = 20;
    site.load = 0.8;
    let w = CostWeights {
        w5: 1.0,
        w6: 0.5,
        w7: 2.0,
        ..CostWeights::default()
    };
    assert!(close(compute_cost(&site, &w).unwrap(), 9.1, 1e-12));
}

fn link_strategy() -> impl Strategy<Value = NetworkLink> {
    (6.0..10.5f64, -6.0..0.0f64, 0.001..0.5f64, prop::sample::select(vec![536u32, 1460, 9000])).prop_map(
        |(bw, loss, rtt, mss)| {
            let mut l = NetworkLink::new(s(0), s(1), 10f64.powf(bw), 10f64.powf(loss), rtt);
            l.mss = mss;
            l
        },
    )
}

fn topology(l: &NetworkLink) -> Topology {
    let mut t = Topology::default();
    t.insert(l.clone());
    t.insert(NetworkLink { src: s(1), dst: s(0), ..l.clone() });
    t
}

fn remote_job(input: f64, output: f64, exe: f64) -> JobDataSpec {
    JobDataSpec {
        input_bytes: input,
        output_bytes: output,
        executable_bytes: exe,
        input_source: s(0),
        output_sink: s(0),
        executable_source: s(0),
    }
}

fn weights() -> impl Strategy<Value = CostWeights> {
    (0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64, 0.0..5.0f64, 0.0..5.0f64, 0.01..5.0f64).prop_map(
        |(w5, w6, w7, alpha, beta, gamma)| CostWeights {
            w5,
            w6,
            w7,
            alpha,
            beta,
            gamma,
            ..CostWeights::default()
        },
    )
}

fn site_strategy() -> impl Strategy<Value = SiteState> {
    (0.5..50.0f64, 0usize..200, 0.0..=1.0f64).prop_map(|(cap, q, load)| {
        let mut site = SiteState::new(s(1), cap, 4);
        site.queue_length = q;
        site.load = load;
        site
    })
}

proptest! {
    #[test]
    fn throughput_never_exceeds_bandwidth(l in link_strategy()) {
        prop_assert!(tcp_throughput(&l).unwrap() <= l.bandwidth);
    }

    #[test]
    fn throughput_non_increasing_in_loss_and_rtt(l in link_strategy(), f in 1.0..10.0f64) {
        let base = tcp_throughput(&l).unwrap();
        let lossier = NetworkLink { loss_prob: (l.loss_prob * f).min(1.0), ..l.clone() };
        let slower = NetworkLink { rtt: l.rtt * f, ..l.clone() };
        prop_assert!(tcp_throughput(&lossier).unwrap() <= base);
        prop_assert!(tcp_throughput(&slower).unwrap() <= base);
    }

    #[test]
    fn total_cost_monotone(
        l in link_strategy(),
        site in site_strategy(),
        w in weights(),
        bytes in prop::array::uniform3(0.0..1e10f64),
        bump in 1.0..4.0f64,
        which in 0usize..6,
    ) {
        let job = remote_job(bytes[0], bytes[1], bytes[2]);
        let before = total_cost(&job, &site, &topology(&l), &w).unwrap().total;
        let (mut job2, mut site2, mut l2) = (job.clone(), site.clone(), l.clone());
        match which {
            0 => l2.loss_prob = (l.loss_prob * bump).min(1.0),
            1 => site2.queue_length = site.queue_length + bump as usize,
            2 => site2.load = (site.load * bump).min(1.0),
            3 => job2.input_bytes *= bump,
            4 => job2.output_bytes *= bump,
            _ => job2.executable_bytes *= bump,
        }
        let after = total_cost(&job2, &site2, &topology(&l2), &w).unwrap().total;
        prop_assert!(after >= before, "{which}: {before} -> {after}");
    }

    #[test]
    fn dtc_is_sum_of_legs(l in link_strategy(), bytes in prop::array::uniform3(0.0..1e10f64), zero in 0usize..3) {
        let t = topology(&l);
        let job = remote_job(bytes[0], bytes[1], bytes[2]);
        let legs = [
            transfer_time(bytes[0], &l).unwrap(),
            transfer_time(bytes[1], t.get(s(1), s(0)).unwrap()).unwrap(),
            transfer_time(bytes[2], &l).unwrap(),
        ];
        let full = data_transfer_cost(&job, s(1), &t).unwrap();
        prop_assert!(close(full, legs.iter().sum(), 1e-12));

        let mut cut = bytes;
        cut[zero] = 0.0;
        let without = data_transfer_cost(&remote_job(cut[0], cut[1], cut[2]), s(1), &t).unwrap();
        prop_assert!((full - legs[zero] - without).abs() <= 1e-9 * full.max(1.0));
    }

    #[test]
    fn total_linear_in_each_scale(
        l in link_strategy(),
        site in site_strategy(),
        w in weights(),
        bytes in prop::array::uniform3(0.0..1e10f64),
        k in 0.0..10.0f64,
    ) {
        let t = topology(&l);
        let job = remote_job(bytes[0], bytes[1], bytes[2]);
        let b = total_cost(&job, &site, &t, &w).unwrap();
        for (i, part) in [b.network, b.compute, b.dtc].into_iter().enumerate() {
            let mut w2 = w.clone();
            match i {
                0 => w2.alpha *= k,
                1 => w2.beta *= k,
                _ => w2.gamma *= k,
            }
            let scale = [w.alpha, w.beta, w.gamma][i];
            let b2 = total_cost(&job, &site, &t, &w2).unwrap();
            let expected = b.total + (k - 1.0) * scale * part;
            prop_assert!((b2.total - expected).abs() <= 1e-9 * b2.total.abs().max(b.total.abs()).max(1.0));
        }
    }

    #[test]
    fn network_cost_scaling(l in link_strategy(), reference in 1e6..1e10f64) {
        let c = network_cost(&l, reference).unwrap();
        prop_assert!(close(c, l.loss_prob / l.bandwidth * reference, 1e-12));
        let local = NetworkLink { dst: l.src, ..l.clone() };
        prop_assert_eq!(network_cost(&local, reference).unwrap(), 0.0);
    }

    #[test]
    fn pure_functions_repeat_bitwise(l in link_strategy(), site in site_strategy(), w in weights()) {
        let job = remote_job(1e9, 1e8, 1e7);
        let a = total_cost(&job, &site, &topology(&l), &w).unwrap();
        let b = total_cost(&job, &site, &topology(&l), &w).unwrap();
        prop_assert_eq!(a.total.to_bits(), b.total.to_bits());
    }
}
