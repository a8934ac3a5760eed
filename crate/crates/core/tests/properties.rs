use flexhist::certificates::{solve_q, trlap_delta};
use flexhist::distortion::{drop, move_distance};
use flexhist::mechanisms::{mech_bucket, mech_trlap, BucketSpec, RngStream};
use flexhist::transport::{tv_distance, winf_lossy, DiscreteDistribution};
use flexhist::{dhist, neighbors, Histogram, MetricSpace, Point};
use proptest::prelude::*;

fn bars(max_len: usize, max_count: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..=max_count, 1..=max_len).prop_filter("non-empty", |v| v.iter().sum::<u64>() > 0)
}

fn dist(bound: i64) -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::btree_map(0..bound, 1u32..=8, 1..=4).prop_map(move |m| {
        let total: u32 = m.values().sum();
        let atoms = m.into_iter().map(|(p, w)| (Point::int(p), w as f64 / total as f64)).collect();
        DiscreteDistribution::new(MetricSpace::line(bound as usize), atoms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn winf_is_monotone_in_gamma(p in dist(10), q in dist(10), g in 0.0f64..1.0, h in 0.0f64..1.0) {
        let (lo, hi) = if g <= h { (g, h) } else { (h, g) };
        prop_assert!(winf_lossy(&p, &q, hi).unwrap() <= winf_lossy(&p, &q, lo).unwrap());
    }

    #[test]
    fn winf_is_symmetric(p in dist(10), q in dist(10), g in 0.0f64..1.0) {
        prop_assert_eq!(winf_lossy(&p, &q, g).unwrap(), winf_lossy(&q, &p, g).unwrap());
    }

    #[test]
    fn winf_vanishes_beyond_tv(p in dist(10), q in dist(10)) {
        let tv = tv_distance(&p, &q).unwrap();
        prop_assert_eq!(winf_lossy(&p, &q, (tv + 1e-12).min(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn neighbors_symmetric(x in bars(5, 4), i in 0usize..5) {
        let mut y = x.clone();
        let i = i % y.len();
        y[i] += 1;
        let (hx, hy) = (Histogram::from_bars(&x), Histogram::from_bars(&y));
        prop_assert!(neighbors(&hx, &hy).unwrap() && neighbors(&hy, &hx).unwrap() && neighbors(&hx, &hx).unwrap());
    }

    #[test]
    fn drop_of_subhistogram_is_size_fraction(x in bars(6, 6), keep in prop::collection::vec(0.0f64..=1.0, 6)) {
        let y: Vec<u64> = x.iter().zip(&keep).map(|(&c, &k)| (c as f64 * k).floor() as u64).collect();
        let (hx, hy) = (Histogram::from_bars(&x), Histogram::from_bars(&y));
        let expect = (hx.size() - hy.size()) as f64 / hx.size() as f64;
        prop_assert!((drop(&hx, &hy).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn move_to_self_is_zero(x in bars(6, 6)) {
        let h = Histogram::from_bars(&x);
        prop_assert_eq!(move_distance(&h, &h).unwrap(), 0.0);
    }

    #[test]
    fn trlap_never_adds_elements(x in bars(20, 30), tau in 0.01f64..0.6, eps in 0.1f64..3.0, seed: u64) {
        let h = Histogram::from_bars(&x);
        let y = mech_trlap(&h, tau, eps, &mut RngStream::new(seed)).unwrap();
        prop_assert!(y.is_sub_of(&h));
    }

    #[test]
    fn bucketing_preserves_size_and_bound(x in bars(30, 5), w in 0.5f64..6.0) {
        let h = Histogram::from_bars(&x);
        let y = mech_bucket(&h, BucketSpec::new(w, h.space()).unwrap()).unwrap();
        prop_assert_eq!(y.size(), h.size());
        prop_assert!(dhist(&h, &y).unwrap() <= w / 2.0 + 1e-9);
    }

    #[test]
    fn solve_q_inverts_delta(eps in 0.01f64..5.0, log2_delta in -40.0f64..-1.5) {
        let delta = 2f64.powf(log2_delta);
        let q = solve_q(eps, delta).unwrap();
        prop_assert!(((trlap_delta(eps, q) - delta) / delta).abs() < 1e-10);
    }
}
