//! Shared fixtures for the benchmarks.

use hypaff_core::{preset_belykh, MapSpec, SbrConfig, UnstableCurve};

/// The Belykh map used throughout: `lambda = 0.55`, `gamma = 2`, `k = 0`.
pub fn standard_map() -> MapSpec {
    preset_belykh(0.55, 2.0, 0.0).expect("valid preset")
}

/// A tilted Belykh map with a non-trivial discontinuity line.
pub fn tilted_map() -> MapSpec {
    preset_belykh(0.55, 1.8, 0.1).expect("valid preset")
}

pub fn start_curve(m: &MapSpec) -> UnstableCurve {
    UnstableCurve::default_for(m).expect("default curve")
}

/// Sampling run of `points * steps` map evaluations on a 128 x 128 grid.
pub fn sampling(points: usize, steps: usize) -> SbrConfig {
    SbrConfig {
        n_points: points,
        n_steps: steps,
        burn_in: steps / 10,
        nx: 128,
        ny: 128,
        ..SbrConfig::default()
    }
}
