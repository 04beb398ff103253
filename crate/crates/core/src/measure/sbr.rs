use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::entropy::BlockCounts;
use super::{EmpiricalMeasure, Grid, UnstableCurve};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::map::{BoundaryPolicy, Location, MapSpec};

/// Sampling configuration for [`estimate_sbr`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbrConfig {
    pub n_points: usize,
    pub n_steps: usize,
    pub burn_in: usize,
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
    /// Amplitude of the uniform `x2` noise added after every step; 0 turns
    /// it off.
    pub dither: f64,
    /// Longest symbol block to count along the recorded iterates.
    pub record_blocks: Option<usize>,
}

impl Default for SbrConfig {
    fn default() -> Self {
        SbrConfig {
            n_points: 10_000,
            n_steps: 10_000,
            burn_in: 1_000,
            nx: 512,
            ny: 512,
            seed: 0,
            dither: DEFAULT_DITHER,
            record_blocks: None,
        }
    }
}

/// Without noise, orbits of maps with `gamma = 2` lose one mantissa bit
/// per step and collapse onto a fixed point after about 53 steps.
pub const DEFAULT_DITHER: f64 = 1e-12;

/// Allowed share of iterates that needed a boundary perturbation.
pub const MAX_BOUNDARY_FRACTION: f64 = 1e-3;

// points per rayon task
const CHUNK: usize = 16;

/// One orbit with optional noise, driven by its own random stream.
pub(crate) struct Walker<'a> {
    m: &'a MapSpec,
    rng: ChaCha8Rng,
    dither: f64,
    pub x: Point,
    pub piece: usize,
    pub perturbations: u64,
}

impl<'a> Walker<'a> {
    /// Stream `stream` of the generator seeded with `seed`.
    pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    pub(crate) fn start(
        m: &'a MapSpec,
        curve: &UnstableCurve,
        mut rng: ChaCha8Rng,
        dither: f64,
    ) -> Option<Self> {
        let s: f64 = rng.random();
        let y = curve.sigma1 + (curve.sigma2 - curve.sigma1) * s;
        let (x, piece, moved) = m.settle(Point::new(curve.rho, y), BoundaryPolicy::perturb())?;
        Some(Walker {
            m,
            rng,
            dither,
            x,
            piece,
            perturbations: moved as u64,
        })
    }

    /// Advances one step; `false` if the orbit could not be continued.
    #[inline]
    pub(crate) fn step(&mut self) -> bool {
        let y = self.m.branch(self.piece).apply(self.x);
        if self.dither > 0.0 {
            let noise = self.dither * (2.0 * self.rng.random::<f64>() - 1.0);
            let z = Point::new(y.x, y.y + noise);
            if let Location::Interior(j) = self.m.locate(z) {
                self.x = z;
                self.piece = j;
                return true;
            }
        }
        match self.m.settle(y, BoundaryPolicy::perturb()) {
            Some((q, j, moved)) => {
                self.perturbations += moved as u64;
                self.x = q;
                self.piece = j;
                true
            }
            None => {
                self.perturbations += 1;
                false
            }
        }
    }
}

struct Partial {
    counts: Vec<u64>,
    blocks: Option<BlockCounts>,
    perturbations: u64,
    iterates: u64,
}

impl Partial {
    fn merge(mut self, o: Partial) -> Partial {
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
        if let (Some(a), Some(b)) = (self.blocks.as_mut(), o.blocks.as_ref()) {
            a.merge(b);
        }
        self.perturbations += o.perturbations;
        self.iterates += o.iterates;
        self
    }
}

/// Birkhoff histogram of `n_points` uniform samples on `curve`, each
/// iterated `n_steps` times, recording iterates `burn_in..n_steps`.
///
/// Every sample uses its own random stream, so results do not depend on
/// the thread count.
pub fn estimate_sbr(
    m: &MapSpec,
    curve: &UnstableCurve,
    cfg: &SbrConfig,
) -> Result<EmpiricalMeasure> {
    curve.validate(m)?;
    if cfg.n_points == 0 {
        return Err(Error::Parameter("n_points must be positive".into()));
    }
    if cfg.n_steps <= cfg.burn_in {
        return Err(Error::Parameter(format!(
            "n_steps = {} must exceed burn_in = {}",
            cfg.n_steps, cfg.burn_in
        )));
    }
    if !(cfg.dither >= 0.0 && cfg.dither < 1e-3) {
        return Err(Error::Parameter(format!(
            "dither {} not in [0, 1e-3)",
            cfg.dither
        )));
    }
    let grid = Grid::over(m, cfg.nx, cfg.ny)?;
    let a = m.alphabet_size();
    if let Some(len) = cfg.record_blocks {
        BlockCounts::new(a, len)?;
    }

    let empty = || Partial {
        counts: vec![0; grid.len()],
        blocks: cfg
            .record_blocks
            .map(|len| BlockCounts::new(a, len).expect("checked")),
        perturbations: 0,
        iterates: 0,
    };
    let n_chunks = cfg.n_points.div_ceil(CHUNK);
    let total = (0..n_chunks)
        .into_par_iter()
        .fold(empty, |mut acc, chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(cfg.n_points);
            for idx in lo..hi {
                let rng = Walker::rng(cfg.seed, idx as u64);
                let Some(mut w) = Walker::start(m, curve, rng, cfg.dither) else {
                    acc.perturbations += 1;
                    continue;
                };
                let mut tracker = acc.blocks.as_ref().map(|b| b.tracker());
                for k in 0..cfg.n_steps {
                    if k >= cfg.burn_in {
                        if let Some(cell) = grid.index_of(w.x) {
                            acc.counts[cell] += 1;
                        }
                        if let (Some(t), Some(b)) = (tracker.as_mut(), acc.blocks.as_mut()) {
                            t.push(b, w.piece);
                        }
                    }
                    if k + 1 == cfg.n_steps {
                        break;
                    }
                    acc.iterates += 1;
                    if !w.step() {
                        break;
                    }
                }
                acc.perturbations += w.perturbations;
            }
            acc
        })
        .reduce(empty, Partial::merge);

    if total.perturbations as f64 > MAX_BOUNDARY_FRACTION * total.iterates as f64 {
        return Err(Error::ExcessiveBoundaryEvents {
            events: total.perturbations,
            iterates: total.iterates,
        });
    }
    if total.counts.iter().all(|&c| c == 0) {
        return Err(Error::Degenerate("no sample landed in the grid".into()));
    }
    let mut em = EmpiricalMeasure::from_counts(grid, total.counts);
    em.burn_in = cfg.burn_in;
    em.seed = cfg.seed;
    em.perturbations = total.perturbations;
    em.blocks = total.blocks;
    Ok(em)
}
