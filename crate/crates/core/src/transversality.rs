//! Transversality of power series `g(x) = 1 + Σ b_k x^k` with `|b_k| <= C`.
//!
//! For `n ∈ {2, 3, 4}` the comparison function
//! `h_n(x) = 1 - C (x - 2 x^{n+1}) / (1 - x)` is the worst admissible series:
//! first `n` coefficients at `-C`, the rest at `+C`. On the region
//! `{x ∈ (0, Q_n) : C < f_n(x)}` with `f_n(x) = (1 - x) / (x - 2 x^{n+1})`,
//! any admissible `g` that dips to `delta` must be falling with slope at
//! most `-delta`. [`compute_delta`] certifies such a `delta` on a grid.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orders `n` with a known threshold `Q_n`.
pub const ORDERS: [usize; 3] = [2, 3, 4];

/// Certificates with a smaller `delta` are rejected.
pub const DELTA_FLOOR: f64 = 1e-12;

/// Default series truncation degree.
pub const DEFAULT_TRUNCATION: usize = 200;

/// Absolute slack added to every series comparison, on top of tail bounds.
pub const IMPLICATION_TOLERANCE: f64 = 1e-9;

/// `Q_2 = 0.5`, `Q_3 = 0.61`, `Q_4 = 0.68`.
pub fn threshold(n: usize) -> Result<f64> {
    match n {
        2 => Ok(0.5),
        3 => Ok(0.61),
        4 => Ok(0.68),
        _ => Err(Error::Parameter(format!(
            "order n = {n} not in {{2, 3, 4}}"
        ))),
    }
}

fn check_order(n: usize) -> Result<()> {
    threshold(n).map(|_| ())
}

/// `f_n(x) = (1 - x) / (x - 2 x^{n+1})`.
pub fn eval_f_n(n: usize, x: f64) -> Result<f64> {
    check_order(n)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Parameter(format!("x = {x} not in (0, 1)")));
    }
    let den = x - 2.0 * x.powi(n as i32 + 1);
    if !(den > 0.0) {
        return Err(Error::Parameter(format!(
            "f_{n} undefined at x = {x}: denominator {den:e} is not positive"
        )));
    }
    Ok((1.0 - x) / den)
}

/// `h_n(x)` and `h_n'(x)` in closed form.
pub fn eval_h_n(n: usize, c: f64, x: f64) -> Result<(f64, f64)> {
    check_order(n)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Parameter(format!("x = {x} not in (0, 1)")));
    }
    let xn = x.powi(n as i32);
    let one_m = 1.0 - x;
    let value = 1.0 - c * (x - 2.0 * xn * x) / one_m;
    // d/dx [(x - 2x^{n+1}) / (1 - x)] = (1 - 2(n+1) x^n + 2n x^{n+1}) / (1 - x)^2
    let nf = n as f64;
    let num = 1.0 - 2.0 * (nf + 1.0) * xn + 2.0 * nf * xn * x;
    let derivative = -c * num / (one_m * one_m);
    Ok((value, derivative))
}

/// A truncated admissible series `1 + Σ_{k=1}^{T} b_k x^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    coeffs: Vec<f64>,
    c_bound: f64,
}

/// Value and derivative of a truncated series with bounds on what the
/// dropped tail could contribute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub derivative: f64,
    pub value_tail: f64,
    pub derivative_tail: f64,
}

impl SeriesSpec {
    /// `coeffs[k-1]` is `b_k`.
    pub fn new(coeffs: Vec<f64>, c_bound: f64) -> Result<Self> {
        if !(c_bound >= 1.0 && c_bound.is_finite()) {
            return Err(Error::Parameter(format!("C = {c_bound} must be >= 1")));
        }
        if let Some((k, b)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, b)| !(b.abs() <= c_bound))
        {
            return Err(Error::Parameter(format!(
                "coefficient b_{} = {b} exceeds C = {c_bound}",
                k + 1
            )));
        }
        Ok(SeriesSpec { coeffs, c_bound })
    }

    /// Coefficients drawn uniformly from `[-C, C]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, degree: usize, c_bound: f64) -> Result<Self> {
        let coeffs = (0..degree)
            .map(|_| rng.random_range(-c_bound..=c_bound))
            .collect();
        SeriesSpec::new(coeffs, c_bound)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: f64) -> SeriesValue {
        let mut value = 0.0;
        let mut derivative = 0.0;
        for (k, &b) in self.coeffs.iter().enumerate().rev() {
            // Horner on Σ b_k x^{k-1} and Σ k b_k x^{k-1}
            value = value * x + b;
            derivative = derivative * x + (k + 1) as f64 * b;
        }
        let t = self.coeffs.len() as i32;
        let one_m = 1.0 - x;
        let xt = x.powi(t);
        SeriesValue {
            value: 1.0 + x * value,
            derivative,
            value_tail: self.c_bound * xt * x / one_m,
            derivative_tail: self.c_bound * xt * (t as f64 + 1.0) / (one_m * one_m),
        }
    }
}

/// A grid-certified `delta` for order `n` and coefficient bound `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransversalityCert {
    pub n: usize,
    pub c: f64,
    pub q_n: f64,
    pub delta: f64,
    pub grid_step: f64,
    /// Maximal runs of consecutive grid points inside the region.
    pub region: Vec<(f64, f64)>,
    pub region_description: String,
}

/// The JSON export: `{n, C, Q_n, delta, grid_step}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertExport {
    pub n: usize,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "Q_n")]
    pub q_n: f64,
    pub delta: f64,
    pub grid_step: f64,
}

impl TransversalityCert {
    pub fn export(&self) -> CertExport {
        CertExport {
            n: self.n,
            c: self.c,
            q_n: self.q_n,
            delta: self.delta,
            grid_step: self.grid_step,
        }
    }

    pub fn region_contains(&self, x: f64) -> bool {
        self.region.iter().any(|&(lo, hi)| x >= lo && x <= hi)
    }

    /// Smallest and largest certified grid points.
    pub fn region_hull(&self) -> (f64, f64) {
        (self.region[0].0, self.region[self.region.len() - 1].1)
    }

    /// Grid points of the certified region.
    pub fn grid_points(&self) -> impl Iterator<Item = f64> + '_ {
        let step = self.grid_step;
        self.region.iter().flat_map(move |&(lo, hi)| {
            let j0 = (lo / step).round() as u64;
            let j1 = (hi / step).round() as u64;
            (j0..=j1).map(move |j| j as f64 * step)
        })
    }
}

/// Certifies `delta` for order `n`, bound `C` and grid spacing `grid_step`.
///
/// The region is the set of grid points `x = j * grid_step` in
/// `(grid_step, Q_n - grid_step)` with `C < f_n(x)`. The certified value is
/// `(1 - grid_step * L) * min(h_n(x), -h_n'(x))` over those points, where
/// `L = max(C / (1 - x)^2, 2C / (1 - x)^3)` at the right edge bounds `|h_n'|`
/// and `|h_n''|` on the region.
pub fn compute_delta(n: usize, c: f64, grid_step: f64) -> Result<TransversalityCert> {
    let q_n = threshold(n)?;
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("C = {c} must be >= 1")));
    }
    if !(grid_step > 0.0 && grid_step <= 1e-4) {
        return Err(Error::Parameter(format!(
            "grid step {grid_step} must lie in (0, 1e-4]"
        )));
    }

    let mut region: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    let mut min_v = f64::INFINITY;
    let mut j: u64 = 2;
    loop {
        let x = j as f64 * grid_step;
        if x >= q_n - grid_step {
            break;
        }
        j += 1;
        let inside = eval_f_n(n, x).is_ok_and(|f| c < f);
        if inside {
            let (h, dh) = eval_h_n(n, c, x)?;
            min_v = min_v.min(h.min(-dh));
            open = Some(match open {
                Some((lo, _)) => (lo, x),
                None => (x, x),
            });
        } else if let Some(run) = open.take() {
            region.push(run);
        }
    }
    if let Some(run) = open {
        region.push(run);
    }
    if region.is_empty() {
        return Err(Error::EmptyRegion(format!(
            "no grid point of (0, {q_n}) satisfies {c} < f_{n}(x)"
        )));
    }

    let x_max = region[region.len() - 1].1;
    let om = 1.0 - x_max;
    let lip = (c / (om * om)).max(2.0 * c / (om * om * om));
    let delta = (1.0 - grid_step * lip) * min_v;
    if !(delta >= DELTA_FLOOR) {
        return Err(Error::DeltaBelowThreshold {
            delta,
            threshold: DELTA_FLOOR,
        });
    }
    let region_description = format!("{{x in (0, {q_n}) : {c} < f_{n}(x)}}");
    Ok(TransversalityCert {
        n,
        c,
        q_n,
        delta,
        grid_step,
        region,
        region_description,
    })
}

/// A sample where `g <= delta` but `g' > -delta`, beyond tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub x: f64,
    pub g: f64,
    pub dg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub samples: usize,
    /// Samples where `g <= delta - tol`, i.e. the premise was exercised.
    pub premise_hits: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl ImplicationReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks `g(x) <= delta ⟹ g'(x) <= -delta` at `samples` evenly spread
/// points of the certified region.
pub fn verify_implication(
    cert: &TransversalityCert,
    s: &SeriesSpec,
    samples: usize,
) -> Result<ImplicationReport> {
    if s.c_bound() > cert.c {
        return Err(Error::Precondition(format!(
            "series bound C = {} exceeds certificate bound {}",
            s.c_bound(),
            cert.c
        )));
    }
    let total: f64 = cert.region.iter().map(|(lo, hi)| hi - lo).sum();
    let mut report = ImplicationReport {
        samples,
        premise_hits: 0,
        counterexamples: Vec::new(),
    };
    for k in 0..samples {
        let x = if total > 0.0 {
            let mut target = (k as f64 + 0.5) / samples as f64 * total;
            let mut x = cert.region[cert.region.len() - 1].1;
            for &(lo, hi) in &cert.region {
                if target <= hi - lo {
                    x = lo + target;
                    break;
                }
                target -= hi - lo;
            }
            x
        } else {
            cert.region[k % cert.region.len()].0
        };
        let sv = s.eval(x);
        let tol_g = IMPLICATION_TOLERANCE + sv.value_tail;
        let tol_d = IMPLICATION_TOLERANCE + sv.derivative_tail;
        if sv.value <= cert.delta - tol_g {
            report.premise_hits += 1;
            if sv.derivative > -cert.delta + tol_d {
                report.counterexamples.push(Counterexample {
                    x,
                    g: sv.value,
                    dg: sv.derivative,
                });
            }
        }
    }
    Ok(report)
}

/// `2 delta^{-1} q0^{-l} r`: the length of an interval containing every
/// `q ∈ (q0, Q_n)` in the region with `|q^l + Σ_{k>l} s_k q^k| < r`.
pub fn corollary_interval_bound(cert: &TransversalityCert, q0: f64, l: u32, r: f64) -> Result<f64> {
    if !(q0 > 0.0 && q0 < cert.q_n) {
        return Err(Error::Parameter(format!(
            "q0 = {q0} not in (0, {})",
            cert.q_n
        )));
    }
    if l < 1 {
        return Err(Error::Parameter("l must be at least 1".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("r = {r} must be positive")));
    }
    Ok(2.0 / cert.delta * q0.powi(-(l as i32)) * r)
}
