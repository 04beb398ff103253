use hypaff_core::measure::{
    conditional_slab_density, correlation_decay, empirical_covariances, entropy_estimate,
    invariance_gap, marginal, Axis, CorrelationConfig,
};
use hypaff_core::{
    estimate_sbr, preset_belykh, preset_fat_baker, Error, Observable, SbrConfig, UnstableCurve,
};
use proptest::prelude::*;

fn cfg(n_points: usize, n_steps: usize, seed: u64) -> SbrConfig {
    SbrConfig {
        n_points,
        n_steps,
        burn_in: 50,
        nx: 32,
        ny: 32,
        seed,
        ..SbrConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn normalized_contained_and_deterministic(l in 0.3f64..0.9, k in -0.3f64..0.3, seed in 0u64..1000) {
        let m = preset_belykh(l, 2.0 / (1.0 + k.abs()), k).unwrap();
        let c = UnstableCurve::default_for(&m).unwrap();
        let a = estimate_sbr(&m, &c, &cfg(64, 200, seed)).unwrap();
        prop_assert!((a.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        // every recorded iterate lands in the grid over K
        prop_assert_eq!(a.sample_count, 64 * 150);
        let b = estimate_sbr(&m, &c, &cfg(64, 200, seed)).unwrap();
        prop_assert_eq!(&a.counts, &b.counts);
        let gap = invariance_gap(&m, &a);
        prop_assert!((0.0..=2.0).contains(&gap));
        for axis in [Axis::X1, Axis::X2] {
            prop_assert!((marginal(&a, axis).weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn seeds_agree_within_sampling_noise() {
    let m = preset_belykh(0.55, 2.0, 0.0).unwrap();
    let c = UnstableCurve::default_for(&m).unwrap();
    let a = estimate_sbr(&m, &c, &cfg(400, 1000, 1)).unwrap();
    let b = estimate_sbr(&m, &c, &cfg(400, 1000, 2)).unwrap();
    let l1: f64 = a
        .weights
        .iter()
        .zip(&b.weights)
        .map(|(x, y)| (x - y).abs())
        .sum();
    let per_cell = a.sample_count as f64 / a.grid.len() as f64;
    assert!(l1 < 2.0 / per_cell.sqrt(), "l1 = {l1}");
    assert!(l1 > 0.0);
}

#[test]
fn fat_baker_half_has_uniform_stable_conditionals() {
    let m = preset_fat_baker(0.5).unwrap();
    let c = UnstableCurve::default_for(&m).unwrap();
    let em = estimate_sbr(
        &m,
        &c,
        &SbrConfig {
            n_points: 2000,
            n_steps: 2000,
            burn_in: 100,
            nx: 64,
            ny: 64,
            ..SbrConfig::default()
        },
    )
    .unwrap();
    for center in [-0.6, 0.1, 0.5] {
        let d = conditional_slab_density(&em, center, 1.0 / 64.0).unwrap();
        assert!(
            d.l1_from_uniform() < 0.06,
            "center {center}: {}",
            d.l1_from_uniform()
        );
    }
    let full = conditional_slab_density(&em, 0.0, 1.0).unwrap();
    assert_eq!(full, marginal(&em, Axis::X1));
    assert!(matches!(
        conditional_slab_density(&em, 0.0, 1e-6),
        Err(Error::EmptySlab { .. })
    ));
}

#[test]
fn undithered_doubling_orbits_collapse() {
    // floating-point doubling runs out of mantissa bits within ~60 steps
    let m = preset_belykh(0.55, 2.0, 0.0).unwrap();
    let c = UnstableCurve::default_for(&m).unwrap();
    let run = |dither| {
        estimate_sbr(
            &m,
            &c,
            &SbrConfig {
                dither,
                nx: 10,
                ny: 10,
                ..cfg(200, 400, 0)
            },
        )
        .map(|em| marginal(&em, Axis::X2).l1_from_uniform())
    };
    assert!(run(1e-12).unwrap() < 0.1);
    match run(0.0) {
        Ok(l1) => assert!(l1 > 1.0, "l1 = {l1}"),
        Err(e) => assert!(matches!(e, Error::ExcessiveBoundaryEvents { .. })),
    }
}

#[test]
fn lag_zero_is_the_variance() {
    let m = preset_belykh(0.55, 2.0, 0.0).unwrap();
    let c = UnstableCurve::default_for(&m).unwrap();
    let cfg = CorrelationConfig {
        orbit_length: 100_000,
        max_lag: 10,
        ..CorrelationConfig::default()
    };
    let cov = empirical_covariances(&m, &c, &Observable::X1, &Observable::X1, &cfg).unwrap();
    assert!(cov[0] > 0.0);
    let tol = 3.0 / (cfg.orbit_length as f64).sqrt();
    assert!(cov.iter().all(|v| v.abs() <= cov[0] + tol));
    let r = correlation_decay(&m, &c, &Observable::X2, &Observable::X2, &cfg).unwrap();
    assert!((r.covariances[0] - 1.0 / 3.0).abs() < 0.01);
}

#[test]
fn entropy_needs_enough_samples() {
    let m = preset_belykh(0.55, 2.0, 0.0).unwrap();
    let c = UnstableCurve::default_for(&m).unwrap();
    let em = estimate_sbr(
        &m,
        &c,
        &SbrConfig {
            record_blocks: Some(12),
            ..cfg(4, 300, 0)
        },
    )
    .unwrap();
    let blocks = em.blocks.as_ref().unwrap();
    assert!(matches!(
        entropy_estimate(&m, blocks, 12),
        Err(Error::Undersampled(_))
    ));
    let e = entropy_estimate(&m, blocks, 1).unwrap();
    assert!((e.rate - 2f64.ln()).abs() < 0.01);
}
