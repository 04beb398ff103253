use std::fs;

use hypaff_core::measure::{
    conditional_slab_density, consistency_check, default_half_width, entropy_estimate,
    invariance_gap, marginal, Axis, CorrelationConfig,
};
use hypaff_core::partition::refine_to_depth_capped;
use hypaff_core::transversality::corollary_interval_bound;
use hypaff_core::{
    check_a2, compute_d_tau, compute_delta, correlation_decay, enumerate_words, estimate_sbr,
    gate_corollary, gate_theorem, preset_belykh, preset_fat_baker, separation_series,
    stable_coordinate, verify_implication, A2Outcome, EmpiricalMeasure, MapSpec, Observable, Point,
    SbrConfig, SeriesSpec, UnstableCurve, Word,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::error::Failure;

pub struct Artifact {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

/// What a pipeline produced; nothing is on disk yet.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// False when the pipeline ran but its check did not pass.
    pub certified: bool,
    pub summary: String,
}

impl Outcome {
    fn new(summary: String) -> Self {
        Outcome {
            artifacts: Vec::new(),
            certified: true,
            summary,
        }
    }

    fn json(mut self, name: &'static str, value: &impl Serialize) -> Result<Self, Failure> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.artifacts.push(Artifact { name, bytes });
        Ok(self)
    }

    fn raw(mut self, name: &'static str, bytes: impl Into<Vec<u8>>) -> Self {
        self.artifacts.push(Artifact {
            name,
            bytes: bytes.into(),
        });
        self
    }
}

pub fn resolve_map(a: &MapArgs) -> Result<MapSpec, Failure> {
    if let Some(path) = &a.map {
        if a.preset.is_some() || a.lambda.is_some() || a.gamma.is_some() || a.k.is_some() {
            return Err(Failure::Usage(
                "--map cannot be combined with --preset, --lambda, --gamma or --k".into(),
            ));
        }
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read map file {}: {e}", path.display())))?;
        return serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("map file {}: {e}", path.display())));
    }
    let m = match a.preset.unwrap_or(Preset::Belykh) {
        Preset::Belykh => preset_belykh(
            a.lambda.unwrap_or(0.55),
            a.gamma.unwrap_or(2.0),
            a.k.unwrap_or(0.0),
        )?,
        Preset::FatBaker => {
            if a.gamma.is_some() || a.k.is_some() {
                return Err(Failure::Usage("fat-baker takes only --lambda".into()));
            }
            preset_fat_baker(a.lambda.unwrap_or(0.5))?
        }
    };
    Ok(m)
}

pub fn execute(cmd: &Command, m: &MapSpec, seed: u64) -> Result<Outcome, Failure> {
    match cmd {
        Command::Gate(a) => gate(m, a),
        Command::Refine(a) => refine(m, a),
        Command::Dtau(a) => dtau(m, a),
        Command::A2(a) => a2(m, a),
        Command::Transversality(a) => transversality(a, seed),
        Command::Words(a) => words(m, a),
        Command::Sbr(a) => sbr(m, a, seed),
        Command::Density(a) => density(m, a, seed),
        Command::Entropy(a) => entropy(m, a, seed),
        Command::Correlations(a) => correlations(m, a, seed),
        Command::Coordinate(a) => coordinate(m, a),
    }
}

fn gate(m: &MapSpec, a: &GateArgs) -> Result<Outcome, Failure> {
    let report = match (a.t0, a.t1) {
        (Some(t0), Some(t1)) => gate_theorem(m, t0, t1)?,
        _ => gate_corollary(m),
    };
    let mut out = Outcome::new(format!(
        "area expansion {:.6}, C {:.6}, overall {}",
        report.area_expansion, report.c_ratio, report.overall
    ))
    .json("gate_report.json", &report)?;
    out.certified = report.overall;
    Ok(out)
}

fn refine(m: &MapSpec, a: &RefineArgs) -> Result<Outcome, Failure> {
    let z = refine_to_depth_capped(m, a.depth, a.cap)?;
    Outcome::new(format!(
        "depth {}: {} cells, {} boundary segments",
        z.depth(),
        z.cells().len(),
        z.boundary().len()
    ))
    .json("partition.json", &z.export())
}

fn dtau(m: &MapSpec, a: &DtauArgs) -> Result<Outcome, Failure> {
    let (d, witness) = compute_d_tau(m, a.tau)?;
    Outcome::new(format!("D_{} = {d}", a.tau)).json(
        "dtau.json",
        &json!({ "tau": a.tau, "D_tau": d, "witness": witness }),
    )
}

fn a2(m: &MapSpec, a: &A2Args) -> Result<Outcome, Failure> {
    let outcome = check_a2(m, a.tau_max)?;
    let (summary, certified) = match &outcome {
        A2Outcome::Pass(c) => (
            format!("passes at tau {} with D_tau {}", c.tau, c.d_tau),
            true,
        ),
        A2Outcome::Fail { .. } => (format!("no tau <= {} passes", a.tau_max), false),
    };
    let mut out = Outcome::new(summary).json("a2.json", &outcome)?;
    out.certified = certified;
    Ok(out)
}

#[derive(Serialize)]
struct SeriesFailure {
    series: usize,
    x: f64,
    g: f64,
    dg: f64,
}

fn transversality(a: &TransversalityArgs, seed: u64) -> Result<Outcome, Failure> {
    let cert = compute_delta(a.n, a.c, a.grid_step)?;
    let bound = match (a.q0, a.l, a.r) {
        (Some(q0), Some(l), Some(r)) => Some(corollary_interval_bound(&cert, q0, l, r)?),
        _ => None,
    };
    let mut out = Outcome::new(format!("n {} C {}: delta {:e}", a.n, a.c, cert.delta))
        .json("cert.json", &cert.export())?;

    if a.series > 0 {
        let reports = (0..a.series)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let s = SeriesSpec::random(&mut rng, a.degree, a.c)?;
                verify_implication(&cert, &s, a.samples)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let premise_hits: usize = reports.iter().map(|r| r.premise_hits).sum();
        let failures: Vec<SeriesFailure> = reports
            .iter()
            .enumerate()
            .flat_map(|(series, r)| {
                r.counterexamples.iter().map(move |c| SeriesFailure {
                    series,
                    x: c.x,
                    g: c.g,
                    dg: c.dg,
                })
            })
            .collect();
        out.summary += &format!(
            ", {} counterexamples in {} series",
            failures.len(),
            a.series
        );
        out.certified = failures.is_empty();
        out = out.json(
            "implication.json",
            &json!({
                "series": a.series,
                "degree": a.degree,
                "samples_per_series": a.samples,
                "premise_hits": premise_hits,
                "counterexamples": failures,
            }),
        )?;
    }
    if let Some(b) = bound {
        out.summary += &format!(", interval bound {b:e}");
        out = out.json(
            "bound.json",
            &json!({
                "q0": a.q0,
                "l": a.l,
                "r": a.r,
                "delta": cert.delta,
                "bound": b,
            }),
        )?;
    }
    Ok(out)
}

fn words(m: &MapSpec, a: &WordsArgs) -> Result<Outcome, Failure> {
    let e = enumerate_words(m, a.length)?;
    let mut words = e.words_json()?;
    words.push('\n');
    Outcome::new(format!(
        "{} words of length {}, rate {:.6}",
        e.census.count, e.census.length, e.census.fitted_rate
    ))
    .raw("words.json", words)
    .raw("census.csv", e.census_csv())
    .json("census.json", &e.census)
}

fn curve(m: &MapSpec, a: &CurveArgs) -> Result<UnstableCurve, Failure> {
    match (a.rho, a.sigma1, a.sigma2) {
        (Some(rho), Some(sigma1), Some(sigma2)) => Ok(UnstableCurve {
            rho,
            sigma1,
            sigma2,
        }),
        _ => Ok(UnstableCurve::default_for(m)?),
    }
}

fn sampling_config(a: &SamplingArgs, seed: u64, record_blocks: Option<usize>) -> SbrConfig {
    SbrConfig {
        n_points: a.points,
        n_steps: a.steps,
        burn_in: a.burn_in,
        nx: a.nx,
        ny: a.ny,
        seed,
        dither: a.dither,
        record_blocks,
    }
}

fn sample(
    m: &MapSpec,
    a: &SamplingArgs,
    seed: u64,
    record_blocks: Option<usize>,
) -> Result<(UnstableCurve, EmpiricalMeasure), Failure> {
    let c = curve(m, &a.curve)?;
    let em = estimate_sbr(m, &c, &sampling_config(a, seed, record_blocks))?;
    Ok((c, em))
}

fn sbr(m: &MapSpec, a: &SbrArgs, seed: u64) -> Result<Outcome, Failure> {
    let (c, em) = sample(m, &a.sampling, seed, None)?;
    let gap = invariance_gap(m, &em);
    let l1_x1 = marginal(&em, Axis::X1).l1_from_uniform();
    let l1_x2 = marginal(&em, Axis::X2).l1_from_uniform();
    // non-ergodic parameters can make the limit depend on the start
    let other_curve = UnstableCurve::default_in(m, m.alphabet_size())?;
    let other_seed = seed.wrapping_add(1);
    let other = estimate_sbr(
        m,
        &other_curve,
        &sampling_config(&a.sampling, other_seed, None),
    )?;
    let check = consistency_check(&em, &other)?;
    Outcome::new(format!(
        "{} samples, {} perturbations, invariance gap {gap:.4}, cross-run L1 {:.4} (budget {:.4})",
        em.sample_count, em.perturbations, check.l1, check.budget
    ))
    .raw("histogram.csv", em.histogram_csv())
    .raw("heatmap.pgm", em.heatmap_pgm())
    .json(
        "sbr_summary.json",
        &json!({
            "curve": c,
            "grid": em.grid,
            "sample_count": em.sample_count,
            "burn_in": em.burn_in,
            "seed": em.seed,
            "perturbations": em.perturbations,
            "invariance_gap": gap,
            "marginal_l1_from_uniform": { "x1": l1_x1, "x2": l1_x2 },
            "consistency": {
                "curve": other_curve,
                "seed": other_seed,
                "l1": check.l1,
                "budget": check.budget,
                "within_budget": check.within_budget,
            },
        }),
    )
}

fn density(m: &MapSpec, a: &DensityArgs, seed: u64) -> Result<Outcome, Failure> {
    let half_width = a.half_width.unwrap_or_else(|| default_half_width(m));
    let (_, em) = sample(m, &a.sampling, seed, None)?;
    let x1 = marginal(&em, Axis::X1);
    let x2 = marginal(&em, Axis::X2);
    let slab = conditional_slab_density(&em, a.slab_center, half_width)?;
    Ok(Outcome::new(format!(
        "marginal L1 from uniform: x1 {:.4}, x2 {:.4}",
        x1.l1_from_uniform(),
        x2.l1_from_uniform()
    ))
    .raw("marginal_x1.csv", x1.to_csv())
    .raw("marginal_x2.csv", x2.to_csv())
    .raw("conditional_x1.csv", slab.to_csv()))
}

fn entropy(m: &MapSpec, a: &EntropyArgs, seed: u64) -> Result<Outcome, Failure> {
    let (_, em) = sample(m, &a.sampling, seed, Some(a.max_len))?;
    let blocks = em.blocks.as_ref().expect("blocks were recorded");
    let est = entropy_estimate(m, blocks, a.max_len)?;
    Outcome::new(format!("entropy rate {:.6}", est.rate)).json(
        "entropy.json",
        &json!({
            "rate": est.rate,
            "log_gamma_min": m.gamma_min().ln(),
            "log_gamma_max": m.gamma_max().ln(),
            "table": est.table,
        }),
    )
}

fn observable(s: &str) -> Result<Observable, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "unknown observable {s:?}; use x1, x2, const:V or bump:CX,CY,R"
        ))
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    match s.split_once(':') {
        None if s == "x1" => Ok(Observable::X1),
        None if s == "x2" => Ok(Observable::X2),
        Some(("const", v)) => Ok(Observable::Constant { value: num(v)? }),
        Some(("bump", rest)) => {
            let parts: Vec<&str> = rest.split(',').collect();
            let [cx, cy, r] = parts.as_slice() else {
                return Err(bad());
            };
            Ok(Observable::Bump {
                center: Point::new(num(cx)?, num(cy)?),
                radius: num(r)?,
            })
        }
        _ => Err(bad()),
    }
}

fn correlations(m: &MapSpec, a: &CorrelationArgs, seed: u64) -> Result<Outcome, Failure> {
    let phi = observable(&a.phi)?;
    let psi = observable(&a.psi)?;
    let c = curve(m, &a.curve)?;
    let cfg = CorrelationConfig {
        orbit_length: a.orbit_length,
        max_lag: a.lags,
        burn_in: a.burn_in,
        seed,
        dither: a.dither,
    };
    let report = correlation_decay(m, &c, &phi, &psi, &cfg)?;
    Outcome::new(format!(
        "theta {:.4}, R^2 {:.4} over {} lags",
        report.theta_fit,
        report.fit_quality,
        report.fit_lags.len()
    ))
    .json("correlations.json", &report)
}

fn past(s: &str, truncation: usize) -> Result<Word, Failure> {
    let symbols = s
        .split(',')
        .map(|t| t.trim().parse::<u16>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::Usage(format!("past {s:?} is not a comma-separated symbol list")))?;
    let symbols = symbols
        .iter()
        .copied()
        .cycle()
        .take(truncation.max(symbols.len()))
        .collect();
    Ok(Word::from_symbols(symbols)?)
}

fn coordinate(m: &MapSpec, a: &CoordinateArgs) -> Result<Outcome, Failure> {
    let lambdas: Vec<f64> = m.pieces().iter().map(|p| p.lambda).collect();
    let us: Vec<f64> = m.pieces().iter().map(|p| p.u).collect();
    let pa = past(&a.past, a.truncation)?;
    let xa = stable_coordinate(&lambdas, &us, a.t, &pa, a.truncation)?;
    let mut summary = format!("x1 {:.15} +- {:e}", xa.x1, xa.error_bound);
    let mut value = json!({ "t": a.t, "truncation": a.truncation, "past": xa });
    if let Some(b) = &a.past_b {
        let pb = past(b, a.truncation)?;
        let xb = stable_coordinate(&lambdas, &us, a.t, &pb, a.truncation)?;
        let sep = separation_series(&pa, &pb, &lambdas, &us, a.t, a.truncation)?;
        summary += &format!(", separation {:e}", sep.value);
        value["past_b"] = serde_json::to_value(xb)?;
        value["separation"] = serde_json::to_value(sep)?;
    }
    Outcome::new(summary).json("coordinate.json", &value)
}
