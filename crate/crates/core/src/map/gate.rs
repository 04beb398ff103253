//! Parameter gates for the existence of an absolutely continuous invariant
//! measure: the area-expansion condition plus three (threshold, series
//! bound) conditions indexed by the order `n` of the comparison function.

use serde::{Deserialize, Serialize};

use super::MapSpec;
use crate::error::{Error, Result};
use crate::transversality::{eval_f_n, threshold, ORDERS};

/// One of the three threshold conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub n: usize,
    pub q_n: f64,
    /// The contraction value tested (`lambda_max` or `t1 * lambda_max`).
    pub x: f64,
    pub below_threshold: bool,
    /// `f_n(x)`, absent where its denominator vanishes or goes negative.
    pub f_n: Option<f64>,
    /// `f_n(x) - C`; positive when the coefficient bound holds.
    pub c_margin: Option<f64>,
    pub passes: bool,
}

/// Extra data reported by [`gate_theorem`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterWindow {
    pub t0: f64,
    pub t1: f64,
    pub scaled_lambda_max: f64,
    /// `min{1/(2C), 0.68}`, the bound used for the power-series estimate.
    pub power_series_limit: f64,
    pub power_series_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub area_expansion: f64,
    #[serde(rename = "C_ratio")]
    pub c_ratio: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub passes: Vec<ConditionCheck>,
    pub overall: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window: Option<ParameterWindow>,
}

impl MapSpec {
    /// `max{|u_i - u_j|, |u_i|} / min{|u_i - u_j| : u_i != u_j}`.
    pub fn c_ratio(&self) -> f64 {
        let us: Vec<f64> = self.pieces.iter().map(|p| p.u).collect();
        let mut num = us.iter().map(|u| u.abs()).fold(0.0, f64::max);
        let mut den = f64::INFINITY;
        for i in 0..us.len() {
            for j in 0..us.len() {
                if i == j {
                    continue;
                }
                let d = (us[i] - us[j]).abs();
                num = num.max(d);
                if d > 0.0 {
                    den = den.min(d);
                }
            }
        }
        num / den
    }
}

fn conditions(x: f64, c: f64) -> Vec<ConditionCheck> {
    ORDERS
        .iter()
        .map(|&n| {
            let q_n = threshold(n).expect("supported order");
            let f_n = eval_f_n(n, x).ok();
            let below_threshold = x < q_n;
            let c_margin = f_n.map(|f| f - c);
            ConditionCheck {
                n,
                q_n,
                x,
                below_threshold,
                f_n,
                c_margin,
                passes: below_threshold && c_margin.is_some_and(|m| m > 0.0),
            }
        })
        .collect()
}

fn report(m: &MapSpec, area_scale: f64, x: f64) -> GateReport {
    let lambda_min = m.lambda_min();
    let gamma_min = m.gamma_min();
    let gamma_max = m.gamma_max();
    let c_ratio = m.c_ratio();
    let area_expansion = area_scale * lambda_min * gamma_min * gamma_min / gamma_max;
    let passes = conditions(x, c_ratio);
    let overall = area_expansion > 1.0 && passes.iter().any(|c| c.passes);
    GateReport {
        area_expansion,
        c_ratio,
        lambda_min,
        lambda_max: m.lambda_max(),
        gamma_min,
        gamma_max,
        passes,
        overall,
        window: None,
    }
}

/// Gate on the fixed parameters of `m`.
pub fn gate_corollary(m: &MapSpec) -> GateReport {
    report(m, 1.0, m.lambda_max())
}

/// Gate for the scaled family `t lambda`, `t in (t0, t1)`.
pub fn gate_theorem(m: &MapSpec, t0: f64, t1: f64) -> Result<GateReport> {
    if !(t0 > 0.0 && t0 < t1) {
        return Err(Error::Parameter(format!(
            "need 0 < t0 < t1, got t0 = {t0}, t1 = {t1}"
        )));
    }
    let x = t1 * m.lambda_max();
    if !(x < 1.0) {
        return Err(Error::Parameter(format!(
            "t1 * lambda_max = {x} must be below 1"
        )));
    }
    let mut r = report(m, t0, x);
    let power_series_limit = (0.5 / r.c_ratio).min(0.68);
    r.window = Some(ParameterWindow {
        t0,
        t1,
        scaled_lambda_max: x,
        power_series_limit,
        power_series_ok: x < power_series_limit,
    });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::preset_belykh;

    #[test]
    fn belykh_055_passes_on_order_three() {
        let m = preset_belykh(0.55, 2.0, 0.0).unwrap();
        let r = gate_corollary(&m);
        assert!((r.area_expansion - 1.1).abs() < 1e-12);
        assert!((r.c_ratio - 1.0).abs() < 1e-12);
        let c3 = &r.passes[1];
        assert_eq!(c3.n, 3);
        assert!((c3.f_n.unwrap() - 0.45 / 0.3669875).abs() < 1e-12);
        assert!(c3.passes);
        assert!(!r.passes[0].passes, "0.55 is above Q_2");
        assert!(r.overall);
    }

    #[test]
    fn belykh_045_fails_on_area() {
        let r = gate_corollary(&preset_belykh(0.45, 2.0, 0.0).unwrap());
        assert!((r.area_expansion - 0.9).abs() < 1e-12);
        assert!(!r.overall);
    }

    #[test]
    fn lambda_07_fails_every_threshold() {
        let r = gate_corollary(&preset_belykh(0.7, 2.0, 0.0).unwrap());
        assert!(r.passes.iter().all(|c| !c.below_threshold && !c.passes));
        assert!(!r.overall);
    }

    #[test]
    fn theorem_window() {
        let m = preset_belykh(0.55, 2.0, 0.0).unwrap();
        assert!(gate_theorem(&m, 1.0, 1.0).is_err());
        let r = gate_theorem(&m, 0.95, 1.0).unwrap();
        assert!((r.area_expansion - 1.045).abs() < 1e-12);
        assert!(r.passes[1].passes);
        assert!(r.overall);
        let w = r.window.unwrap();
        assert_eq!(w.power_series_limit, 0.5);
        assert!(!w.power_series_ok);
    }

    #[test]
    fn theorem_at_062() {
        let m = preset_belykh(0.62, 2.0, 0.0).unwrap();
        let r = gate_theorem(&m, 0.9, 1.0).unwrap();
        let c3 = &r.passes[1];
        let c4 = &r.passes[2];
        assert!(!c3.below_threshold && !c3.passes);
        assert_eq!(c4.q_n, 0.68);
        assert!(c4.below_threshold);
        assert!(c4.f_n.unwrap() < 1.0);
        assert!(!c4.passes);
    }

    #[test]
    fn relabeling_keeps_verdict() {
        let m = preset_belykh(0.58, 1.9, 0.02).unwrap();
        let r = m.relabeled(&[1, 0]).unwrap();
        assert_eq!(gate_corollary(&m).overall, gate_corollary(&r).overall);
        assert_eq!(gate_corollary(&m), gate_corollary(&r));
    }
}
