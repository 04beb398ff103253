use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "hypaff",
    version,
    about = "Piecewise affine hyperbolic maps: geometry, certificates and sampling"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
#[command(next_help_heading = "Global options")]
pub struct GlobalArgs {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker thread cap.
    #[arg(long, global = true, env = "HYPAFF_THREADS")]
    pub threads: Option<usize>,

    #[command(flatten)]
    pub map: MapArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Belykh,
    FatBaker,
}

/// Map source: a preset with parameters, or a MapSpec JSON file.
#[derive(Debug, Args, Serialize)]
#[command(next_help_heading = "Map source")]
pub struct MapArgs {
    /// Built-in map family (default: belykh).
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,

    /// Stable contraction rate.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,

    /// Unstable expansion rate (belykh only).
    #[arg(long, global = true)]
    pub gamma: Option<f64>,

    /// Slope of the discontinuity line (belykh only).
    #[arg(long, global = true)]
    pub k: Option<f64>,

    /// MapSpec JSON file.
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Check the parameter conditions for an absolutely continuous invariant measure.
    Gate(GateArgs),
    /// Refine the partition by preimages and export its cells and boundary.
    Refine(RefineArgs),
    /// Boundary multiplicity of the depth-tau partition.
    Dtau(DtauArgs),
    /// Search for tau with gamma_min^tau > D_tau + 1.
    A2(A2Args),
    /// Certify the transversality constant of a power-series class.
    Transversality(TransversalityArgs),
    /// Enumerate admissible words and their growth rate.
    Words(WordsArgs),
    /// Birkhoff histogram of iterates started on an unstable curve.
    Sbr(SbrArgs),
    /// Marginal and slab-conditional densities of the sampled measure.
    Density(DensityArgs),
    /// Symbolic entropy rate along sampled orbits.
    Entropy(EntropyArgs),
    /// Autocovariances along one long orbit and their exponential fit.
    Correlations(CorrelationArgs),
    /// Stable coordinate of a symbolic past.
    Coordinate(CoordinateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gate(_) => "gate",
            Command::Refine(_) => "refine",
            Command::Dtau(_) => "dtau",
            Command::A2(_) => "a2",
            Command::Transversality(_) => "transversality",
            Command::Words(_) => "words",
            Command::Sbr(_) => "sbr",
            Command::Density(_) => "density",
            Command::Entropy(_) => "entropy",
            Command::Correlations(_) => "correlations",
            Command::Coordinate(_) => "coordinate",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GateArgs {
    /// Lower end of the parameter window; needs --t1.
    #[arg(long, requires = "t1")]
    pub t0: Option<f64>,

    /// Upper end of the parameter window; needs --t0.
    #[arg(long, requires = "t0")]
    pub t1: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RefineArgs {
    /// Number of refinement steps.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,

    /// Maximum number of cells.
    #[arg(long, default_value_t = hypaff_core::partition::DEFAULT_CELL_CAP)]
    pub cap: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DtauArgs {
    /// Partition depth.
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct A2Args {
    /// Largest depth to try.
    #[arg(long, default_value_t = 5)]
    pub tau_max: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TransversalityArgs {
    /// Order of the comparison function (2, 3 or 4).
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    /// Coefficient bound.
    #[arg(long = "C", default_value_t = 1.0)]
    #[serde(rename = "C")]
    pub c: f64,

    /// Spacing of the certification grid, at most 1e-4.
    #[arg(long, default_value_t = 1e-4)]
    pub grid_step: f64,

    /// Random series to test the certificate against.
    #[arg(long, default_value_t = 0)]
    pub series: usize,

    /// Degree of the random series.
    #[arg(long, default_value_t = hypaff_core::transversality::DEFAULT_TRUNCATION)]
    pub degree: usize,

    /// Evaluation points per random series.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,

    /// Lower parameter bound for the interval estimate; needs --l and --r.
    #[arg(long, requires_all = ["l", "r"])]
    pub q0: Option<f64>,

    /// Index of the leading term.
    #[arg(long, requires_all = ["q0", "r"])]
    pub l: Option<u32>,

    /// Radius of the target set.
    #[arg(long, requires_all = ["q0", "l"])]
    pub r: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct WordsArgs {
    /// Word length.
    #[arg(long, default_value_t = 6)]
    pub length: usize,
}

/// Sampling options shared by the measure pipelines.
#[derive(Debug, Args, Serialize)]
pub struct SamplingArgs {
    /// Starting points on the curve.
    #[arg(long, default_value_t = 10_000)]
    pub points: usize,

    /// Iterates per starting point.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,

    /// Leading iterates left out of the histogram.
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,

    /// Histogram columns.
    #[arg(long, default_value_t = 512)]
    pub nx: usize,

    /// Histogram rows.
    #[arg(long, default_value_t = 512)]
    pub ny: usize,

    /// Noise amplitude added to x2 after every step.
    #[arg(long, default_value_t = hypaff_core::measure::DEFAULT_DITHER)]
    pub dither: f64,

    #[command(flatten)]
    pub curve: CurveArgs,
}

/// Starting curve `{x1 = rho, sigma1 < x2 < sigma2}`; defaults to a
/// vertical segment through piece 1.
#[derive(Debug, Args, Serialize)]
#[command(next_help_heading = "Starting curve")]
pub struct CurveArgs {
    /// x1 coordinate of the starting curve.
    #[arg(long, requires_all = ["sigma1", "sigma2"])]
    pub rho: Option<f64>,

    /// Lower x2 end of the starting curve.
    #[arg(long, requires_all = ["rho", "sigma2"])]
    pub sigma1: Option<f64>,

    /// Upper x2 end of the starting curve.
    #[arg(long, requires_all = ["rho", "sigma1"])]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SbrArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,

    /// Centre of the x2 slab for the conditional density.
    #[arg(long, default_value_t = 0.0)]
    pub slab_center: f64,

    /// Half width of the slab; defaults to 1/512 of the domain height.
    #[arg(long)]
    pub half_width: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,

    /// Longest block length.
    #[arg(long, default_value_t = 10)]
    pub max_len: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CorrelationArgs {
    /// Observable: x1, x2, const:V or bump:CX,CY,R.
    #[arg(long, default_value = "x2")]
    pub phi: String,

    /// Second observable, same syntax as --phi.
    #[arg(long, default_value = "x2")]
    pub psi: String,

    /// Orbit length after burn-in.
    #[arg(long, default_value_t = 10_000_000)]
    pub orbit_length: usize,

    /// Largest lag.
    #[arg(long, default_value_t = 30)]
    pub lags: usize,

    /// Leading iterates discarded.
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,

    /// Noise amplitude added to x2 after every step.
    #[arg(long, default_value_t = hypaff_core::measure::DEFAULT_DITHER)]
    pub dither: f64,

    #[command(flatten)]
    pub curve: CurveArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CoordinateArgs {
    /// Scaling of the contraction rates.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,

    /// Comma-separated 1-based symbols, most recent first; repeated
    /// periodically up to the truncation.
    #[arg(long)]
    pub past: String,

    /// Second past; adds the separation of the two coordinates.
    #[arg(long)]
    pub past_b: Option<String>,

    /// Number of series terms.
    #[arg(long, default_value_t = 200)]
    pub truncation: usize,
}
