use hypaff_core::transversality::{
    compute_delta, corollary_interval_bound, eval_f_n, eval_h_n, threshold, verify_implication,
    SeriesSpec, ORDERS,
};
use proptest::prelude::*;

fn series(c: f64) -> impl Strategy<Value = SeriesSpec> {
    prop::collection::vec(-1.0f64..=1.0, 1..120)
        .prop_map(move |raw| SeriesSpec::new(raw.into_iter().map(|b| b * c).collect(), c).unwrap())
}

/// Series whose first `n` coefficients sit near `-C`, the shape that
/// pushes `g` down towards the threshold.
fn adversarial(c: f64) -> impl Strategy<Value = SeriesSpec> {
    (1usize..5, prop::collection::vec(0.0f64..=1.0, 150)).prop_map(move |(n, raw)| {
        let coeffs = raw
            .into_iter()
            .enumerate()
            .map(|(k, r)| {
                if k < n {
                    -c * (1.0 - 0.2 * r)
                } else {
                    c * (2.0 * r - 1.0)
                }
            })
            .collect();
        SeriesSpec::new(coeffs, c).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn implication_holds_for_admissible_series(s in series(1.0), n in 2usize..=4) {
        let cert = compute_delta(n, 1.0, 1e-4).unwrap();
        prop_assert!(verify_implication(&cert, &s, 500).unwrap().holds());
    }

    #[test]
    fn implication_holds_near_the_extremes(s in adversarial(1.0), n in 2usize..=4) {
        let cert = compute_delta(n, 1.0, 1e-4).unwrap();
        prop_assert!(verify_implication(&cert, &s, 500).unwrap().holds());
    }

    #[test]
    fn series_stay_above_the_all_negative_series(s in series(1.0), n in 2usize..=4, frac in 0.01f64..0.99) {
        // 1 - C x / (1 - x) is the smallest value any admissible series takes
        let x = frac * threshold(n).unwrap();
        let floor = 1.0 - x / (1.0 - x) - 1e-12;
        prop_assert!(s.eval(x).value >= floor);
        prop_assert!(eval_h_n(n, 1.0, x).unwrap().0 >= floor);
    }

    #[test]
    fn f_n_decreasing(n in 2usize..=4, a in 0.001f64..0.6, b in 0.001f64..0.6) {
        let q = threshold(n).unwrap();
        prop_assume!(a < b && b < q);
        prop_assert!(eval_f_n(n, a).unwrap() > eval_f_n(n, b).unwrap());
    }

    #[test]
    fn bound_is_monotone(r1 in 1e-6f64..1e-2, r2 in 1e-6f64..1e-2, q0 in 0.05f64..0.6) {
        let cert = compute_delta(3, 1.0, 1e-4).unwrap();
        let b1 = corollary_interval_bound(&cert, q0, 3, r1).unwrap();
        let b2 = corollary_interval_bound(&cert, q0, 3, r2).unwrap();
        prop_assert_eq!(r1 < r2, b1 < b2);
    }
}

#[test]
fn region_sizes() {
    for n in ORDERS {
        let cert = compute_delta(n, 1.0, 1e-4).unwrap();
        let (lo, hi) = cert.region_hull();
        assert!(lo > 1e-4 && hi < cert.q_n);
        assert_eq!(cert.export().q_n, threshold(n).unwrap());
    }
    // f_4 drops below 1 before its threshold
    let (_, hi) = compute_delta(4, 1.0, 1e-4).unwrap().region_hull();
    assert!(hi < 0.56 && hi > 0.54, "hi = {hi}");
}
