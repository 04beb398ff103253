use serde::{Deserialize, Serialize};

use super::sbr::{Walker, DEFAULT_DITHER};
use super::UnstableCurve;
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::geometry::Point;
use crate::map::MapSpec;

/// Built-in Hölder observables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    X1,
    X2,
    Constant {
        value: f64,
    },
    /// Tent `max(0, 1 - |x - center| / radius)`, Lipschitz with constant `1 / radius`.
    Bump {
        center: Point,
        radius: f64,
    },
}

impl Observable {
    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            Observable::X1 => p.x,
            Observable::X2 => p.y,
            Observable::Constant { value } => value,
            Observable::Bump { center, radius } => (1.0 - p.dist(center) / radius).max(0.0),
        }
    }

    /// `(exponent, constant)` of a Hölder bound `|φ(x) - φ(y)| <= C d(x, y)^η`.
    pub fn holder(&self) -> (f64, f64) {
        match *self {
            Observable::X1 | Observable::X2 => (1.0, 1.0),
            Observable::Constant { .. } => (1.0, 0.0),
            Observable::Bump { radius, .. } => (1.0, 1.0 / radius),
        }
    }

    pub fn describe(&self) -> String {
        let (eta, c) = self.holder();
        let name = match *self {
            Observable::X1 => "x1".to_string(),
            Observable::X2 => "x2".to_string(),
            Observable::Constant { value } => format!("constant {value}"),
            Observable::Bump { center, radius } => {
                format!("tent at ({}, {}) radius {radius}", center.x, center.y)
            }
        };
        format!("{name} (Hölder exponent {eta}, constant {c})")
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Observable::Bump { radius, .. } if !(radius > 0.0) => Err(Error::Parameter(format!(
                "bump radius {radius} must be positive"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationConfig {
    pub orbit_length: usize,
    pub max_lag: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub dither: f64,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        CorrelationConfig {
            orbit_length: 10_000_000,
            max_lag: 30,
            burn_in: 1_000,
            seed: 0,
            dither: DEFAULT_DITHER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub lags: Vec<usize>,
    pub covariances: Vec<f64>,
    /// `exp` of the fitted slope of `ln|C(n)|`.
    pub theta_fit: f64,
    /// R² of the fit.
    pub fit_quality: f64,
    pub fit_lags: Vec<usize>,
    pub noise_floor: f64,
    pub observables: String,
    pub orbit_length: usize,
    pub seed: u64,
    pub assumptions: Vec<String>,
}

/// Smallest number of lags above the noise floor needed for a fit.
pub const MIN_FIT_LAGS: usize = 5;

/// `C(n) = mean(φ(x_{k+n}) ψ(x_k)) - mean(φ(x_{k+n})) mean(ψ(x_k))` over
/// the `orbit_length - n` available pairs, for `n = 0..=max_lag`, along one
/// orbit started on `curve`.
pub fn empirical_covariances(
    m: &MapSpec,
    curve: &UnstableCurve,
    phi: &Observable,
    psi: &Observable,
    cfg: &CorrelationConfig,
) -> Result<Vec<f64>> {
    curve.validate(m)?;
    phi.validate()?;
    psi.validate()?;
    if cfg.max_lag == 0 || cfg.orbit_length < 100 * cfg.max_lag {
        return Err(Error::Parameter(format!(
            "need max_lag >= 1 and orbit_length >= 100 * max_lag, got {} and {}",
            cfg.max_lag, cfg.orbit_length
        )));
    }
    let mut w = Walker::start(m, curve, Walker::rng(cfg.seed, 0), cfg.dither)
        .ok_or_else(|| Error::Degenerate("orbit start could not be placed".into()))?;
    for step in 0..cfg.burn_in {
        if !w.step() {
            return Err(Error::BoundaryAtStep { step, point: w.x });
        }
    }
    let lags = cfg.max_lag + 1;
    let mut ring = vec![0.0; lags];
    let mut sums = vec![0.0; lags];
    let (mut sum_phi, mut sum_psi) = (0.0, 0.0);
    // φ over the first max_lag points, to centre each lag on its own window
    let mut head_phi = vec![0.0; lags];
    for k in 0..cfg.orbit_length {
        if k > 0 && !w.step() {
            return Err(Error::BoundaryAtStep {
                step: cfg.burn_in + k,
                point: w.x,
            });
        }
        let f = phi.eval(w.x);
        let g = psi.eval(w.x);
        sum_phi += f;
        sum_psi += g;
        if k < lags {
            head_phi[k] = f;
        }
        ring[k % lags] = g;
        for (n, s) in sums.iter_mut().enumerate().take(k.min(cfg.max_lag) + 1) {
            *s += f * ring[(k - n) % lags];
        }
    }
    if w.perturbations as f64 > 1e-3 * (cfg.burn_in + cfg.orbit_length) as f64 {
        return Err(Error::ExcessiveBoundaryEvents {
            events: w.perturbations,
            iterates: (cfg.burn_in + cfg.orbit_length) as u64,
        });
    }
    let len = cfg.orbit_length;
    let (mut phi_tail, mut psi_head) = (sum_phi, sum_psi);
    Ok(sums
        .iter()
        .enumerate()
        .map(|(lag, s)| {
            if lag > 0 {
                phi_tail -= head_phi[lag - 1];
                psi_head -= ring[(len - lag) % lags];
            }
            let count = (len - lag) as f64;
            s / count - (phi_tail / count) * (psi_head / count)
        })
        .collect())
}

/// Empirical covariances with an exponential fit over the leading run of
/// lags whose magnitude exceeds `3 / sqrt(orbit_length)`.
pub fn correlation_decay(
    m: &MapSpec,
    curve: &UnstableCurve,
    phi: &Observable,
    psi: &Observable,
    cfg: &CorrelationConfig,
) -> Result<CorrelationReport> {
    let covariances = empirical_covariances(m, curve, phi, psi, cfg)?;
    let noise_floor = 3.0 / (cfg.orbit_length as f64).sqrt();
    let run = covariances
        .iter()
        .take_while(|c| c.abs() > noise_floor)
        .count();
    if run < MIN_FIT_LAGS {
        return Err(Error::DegenerateFit(format!(
            "only {run} leading lags exceed the noise floor {noise_floor:e}; need {MIN_FIT_LAGS}"
        )));
    }
    let xs: Vec<f64> = (0..run).map(|n| n as f64).collect();
    let ys: Vec<f64> = covariances[..run].iter().map(|c| c.abs().ln()).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(CorrelationReport {
        lags: (0..covariances.len()).collect(),
        covariances,
        theta_fit: fit.slope.exp(),
        fit_quality: fit.r_squared,
        fit_lags: (0..run).collect(),
        noise_floor,
        observables: format!("phi = {}; psi = {}", phi.describe(), psi.describe()),
        orbit_length: cfg.orbit_length,
        seed: cfg.seed,
        assumptions: vec!["ergodicity of every power of the map is assumed, not verified".into()],
    })
}
