//! Empirical SBR measures: Birkhoff histograms of pushed-forward samples
//! from an unstable segment, with marginals, slab conditionals, an
//! invariance diagnostic, block entropy and correlation decay.

mod correlation;
mod entropy;
mod sbr;

pub use correlation::{
    correlation_decay, empirical_covariances, CorrelationConfig, CorrelationReport, Observable,
    MIN_FIT_LAGS,
};
pub use entropy::{entropy_estimate, BlockCounts, EntropyEstimate, EntropyRow, MAX_BLOCK_TABLE};
pub use sbr::{estimate_sbr, SbrConfig, DEFAULT_DITHER, MAX_BOUNDARY_FRACTION};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, Point};
use crate::map::{BoundaryPolicy, Location, MapSpec};

/// A vertical segment `{x1 = rho, sigma1 < x2 < sigma2}` inside one piece.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnstableCurve {
    pub rho: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

// interior sample points used to check that a curve stays in one piece
const CURVE_PROBES: usize = 257;

impl UnstableCurve {
    /// Checks the curve and returns its 0-based piece.
    pub(crate) fn validate(&self, m: &MapSpec) -> Result<usize> {
        if !(self.rho.is_finite() && self.sigma1 < self.sigma2) {
            return Err(Error::Parameter(format!(
                "unstable curve needs finite rho and sigma1 < sigma2, got {self:?}"
            )));
        }
        let mut piece = None;
        for k in 1..=CURVE_PROBES {
            let y =
                self.sigma1 + (self.sigma2 - self.sigma1) * k as f64 / (CURVE_PROBES + 1) as f64;
            let p = Point::new(self.rho, y);
            match (m.locate(p), piece) {
                (Location::Interior(i), None) => piece = Some(i),
                (Location::Interior(i), Some(j)) if i == j => {}
                _ => {
                    return Err(Error::Parameter(format!(
                        "unstable curve leaves a single piece near ({}, {y})",
                        self.rho
                    )))
                }
            }
        }
        Ok(piece.expect("at least one probe"))
    }

    /// The longest vertical segment through the centroid of piece 1,
    /// shrunk by 10% at each end.
    pub fn default_for(m: &MapSpec) -> Result<Self> {
        Self::default_in(m, 1)
    }

    /// As [`UnstableCurve::default_for`], through the centroid of the
    /// 1-based `piece`.
    pub fn default_in(m: &MapSpec, piece: usize) -> Result<Self> {
        if piece == 0 || piece > m.alphabet_size() {
            return Err(Error::Parameter(format!(
                "piece {piece} not in 1..={}",
                m.alphabet_size()
            )));
        }
        let idx = piece - 1;
        let c = m.pieces()[idx].region.centroid();
        let span = m.bbox().height();
        let reach = |dir: f64| {
            let (mut lo, mut hi) = (0.0, span);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let ok = (1..=16).all(|k| {
                    let p = Point::new(c.x, c.y + dir * mid * k as f64 / 16.0);
                    matches!(m.locate(p), Location::Interior(i) if i == idx)
                });
                if ok {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let (down, up) = (reach(-1.0), reach(1.0));
        let curve = UnstableCurve {
            rho: c.x,
            sigma1: c.y - 0.9 * down,
            sigma2: c.y + 0.9 * up,
        };
        curve.validate(m)?;
        Ok(curve)
    }
}

/// A uniform `nx x ny` grid over a bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub bbox: BBox,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, bbox: BBox) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Parameter(format!("grid {nx} x {ny} is empty")));
        }
        if !(bbox.width() > 0.0 && bbox.height() > 0.0) {
            return Err(Error::Parameter("grid box has no area".into()));
        }
        Ok(Grid { nx, ny, bbox })
    }

    /// Grid over the bounding box of `K`.
    pub fn over(m: &MapSpec, nx: usize, ny: usize) -> Result<Self> {
        Grid::new(nx, ny, m.bbox())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.bbox.width() / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.bbox.height() / self.ny as f64
    }

    /// Flat index `j * nx + i` of the cell holding `p`; points on the far
    /// edge go to the last cell.
    #[inline]
    pub fn index_of(&self, p: Point) -> Option<usize> {
        let fx = (p.x - self.bbox.min.x) / self.bbox.width();
        let fy = (p.y - self.bbox.min.y) / self.bbox.height();
        if !(0.0..=1.0).contains(&fx) || !(0.0..=1.0).contains(&fy) {
            return None;
        }
        let i = ((fx * self.nx as f64) as usize).min(self.nx - 1);
        let j = ((fy * self.ny as f64) as usize).min(self.ny - 1);
        Some(j * self.nx + i)
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.bbox.min.x + (i as f64 + 0.5) * self.dx()
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.bbox.min.y + (j as f64 + 0.5) * self.dy()
    }

    pub fn center(&self, idx: usize) -> Point {
        Point::new(self.x_center(idx % self.nx), self.y_center(idx / self.nx))
    }

    /// Cloud-in-cell deposit of `w` at `p` onto the four nearest centres.
    fn deposit_linear(&self, hist: &mut [f64], p: Point, w: f64) {
        let split = |v: f64, lo: f64, step: f64, n: usize| -> [(usize, f64); 2] {
            let g = (v - lo) / step - 0.5;
            if g <= 0.0 {
                return [(0, 1.0), (0, 0.0)];
            }
            if g >= (n - 1) as f64 {
                return [(n - 1, 1.0), (n - 1, 0.0)];
            }
            let i0 = g.floor() as usize;
            let f = g - i0 as f64;
            [(i0, 1.0 - f), (i0 + 1, f)]
        };
        let xs = split(p.x, self.bbox.min.x, self.dx(), self.nx);
        let ys = split(p.y, self.bbox.min.y, self.dy(), self.ny);
        for (j, wy) in ys {
            for (i, wx) in xs {
                hist[j * self.nx + i] += w * wx * wy;
            }
        }
    }
}

/// A normalized histogram of Birkhoff samples.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub grid: Grid,
    /// Cell weights, row-major from the bottom row; they sum to 1.
    pub weights: Vec<f64>,
    /// Raw sample counts per cell, when the measure came from sampling.
    pub counts: Option<Vec<u64>>,
    pub sample_count: u64,
    pub burn_in: usize,
    pub seed: u64,
    pub perturbations: u64,
    /// Symbol block counts, when recorded.
    pub blocks: Option<BlockCounts>,
}

impl EmpiricalMeasure {
    /// A measure from arbitrary nonnegative weights, normalized to 1.
    pub fn from_weights(grid: Grid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "{} weights for a grid of {} cells",
                weights.len(),
                grid.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Parameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Parameter("weights carry no mass".into()));
        }
        Ok(EmpiricalMeasure {
            grid,
            weights: weights.iter().map(|w| w / total).collect(),
            counts: None,
            sample_count: 0,
            burn_in: 0,
            seed: 0,
            perturbations: 0,
            blocks: None,
        })
    }

    pub(crate) fn from_counts(grid: Grid, counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let weights = counts.iter().map(|&c| c as f64 / total as f64).collect();
        EmpiricalMeasure {
            grid,
            weights,
            counts: Some(counts),
            sample_count: total,
            burn_in: 0,
            seed: 0,
            perturbations: 0,
            blocks: None,
        }
    }

    /// CSV with header `i,j,x_center,y_center,weight`.
    pub fn histogram_csv(&self) -> String {
        let g = &self.grid;
        let mut s = String::with_capacity(g.len() * 48);
        s.push_str("i,j,x_center,y_center,weight\n");
        for j in 0..g.ny {
            let y = g.y_center(j);
            for i in 0..g.nx {
                let _ = writeln!(
                    s,
                    "{i},{j},{},{y},{}",
                    g.x_center(i),
                    self.weights[j * g.nx + i]
                );
            }
        }
        s
    }

    /// Binary PGM (P5); the top row is the largest `x2`, the heaviest cell is 255.
    pub fn heatmap_pgm(&self) -> Vec<u8> {
        let g = &self.grid;
        let max = self.weights.iter().copied().fold(0.0, f64::max);
        let mut out = format!("P5\n{} {}\n255\n", g.nx, g.ny).into_bytes();
        out.reserve(g.len());
        for j in (0..g.ny).rev() {
            for i in 0..g.nx {
                let w = self.weights[j * g.nx + i];
                out.push(if max > 0.0 {
                    (255.0 * w / max).round() as u8
                } else {
                    0
                });
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X1,
    X2,
}

/// A 1-D histogram on `[lo, hi]` with weights summing to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Density1D {
    pub lo: f64,
    pub hi: f64,
    pub weights: Vec<f64>,
}

impl Density1D {
    fn normalized(lo: f64, hi: f64, raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        Density1D {
            lo,
            hi,
            weights: raw.into_iter().map(|w| w / total).collect(),
        }
    }

    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * (self.hi - self.lo) / self.weights.len() as f64
    }

    /// L1 distance between the bin weights and the uniform distribution.
    pub fn l1_from_uniform(&self) -> f64 {
        let u = 1.0 / self.weights.len() as f64;
        self.weights.iter().map(|w| (w - u).abs()).sum()
    }

    /// CSV with header `bin,center,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin,center,weight\n");
        for (k, w) in self.weights.iter().enumerate() {
            let _ = writeln!(s, "{k},{},{w}", self.center(k));
        }
        s
    }
}

/// Row or column sums of `em`.
pub fn marginal(em: &EmpiricalMeasure, axis: Axis) -> Density1D {
    let g = &em.grid;
    match axis {
        Axis::X1 => {
            let mut raw = vec![0.0; g.nx];
            for row in em.weights.chunks_exact(g.nx) {
                for (r, w) in raw.iter_mut().zip(row) {
                    *r += w;
                }
            }
            Density1D::normalized(g.bbox.min.x, g.bbox.max.x, raw)
        }
        Axis::X2 => {
            let raw = (0..g.ny)
                .map(|j| em.weights[j * g.nx..(j + 1) * g.nx].iter().sum())
                .collect();
            Density1D::normalized(g.bbox.min.y, g.bbox.max.y, raw)
        }
    }
}

/// `x1`-histogram of the rows whose centre satisfies `|x2 - center| <= half_width`.
pub fn conditional_slab_density(
    em: &EmpiricalMeasure,
    x2_center: f64,
    half_width: f64,
) -> Result<Density1D> {
    if !(half_width >= 0.0) {
        return Err(Error::Parameter(format!(
            "half width {half_width} is negative"
        )));
    }
    let g = &em.grid;
    let mut raw = vec![0.0; g.nx];
    for j in 0..g.ny {
        if (g.y_center(j) - x2_center).abs() > half_width {
            continue;
        }
        for (r, w) in raw.iter_mut().zip(&em.weights[j * g.nx..(j + 1) * g.nx]) {
            *r += w;
        }
    }
    if !(raw.iter().sum::<f64>() > 0.0) {
        return Err(Error::EmptySlab {
            center: x2_center,
            half_width,
        });
    }
    Ok(Density1D::normalized(g.bbox.min.x, g.bbox.max.x, raw))
}

/// L1 distance between two sampled measures on the same grid, against the
/// Monte-Carlo budget `2 / sqrt(samples per cell)` of the smaller run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub l1: f64,
    pub budget: f64,
    pub within_budget: bool,
}

pub fn consistency_check(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> Result<ConsistencyCheck> {
    if a.grid != b.grid {
        return Err(Error::Parameter("measures live on different grids".into()));
    }
    let l1: f64 = a
        .weights
        .iter()
        .zip(&b.weights)
        .map(|(x, y)| (x - y).abs())
        .sum();
    let per_cell = a.sample_count.min(b.sample_count) as f64 / a.grid.len() as f64;
    let budget = 2.0 / per_cell.sqrt();
    Ok(ConsistencyCheck {
        l1,
        budget,
        within_budget: l1 <= budget,
    })
}

/// Default slab half width: 1/512 of the height of `K`.
pub fn default_half_width(m: &MapSpec) -> f64 {
    m.bbox().height() / 512.0
}

/// L1 distance between `em` and its pushforward, where each cell's mass
/// moves with its centre and is spread linearly over the nearest centres.
/// Mass whose centre cannot be mapped counts fully towards the gap.
pub fn invariance_gap(m: &MapSpec, em: &EmpiricalMeasure) -> f64 {
    let g = &em.grid;
    let mut pushed = vec![0.0; g.len()];
    let mut lost = 0.0;
    for (idx, &w) in em.weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        match m.settle(g.center(idx), BoundaryPolicy::perturb()) {
            Some((p, i, _)) => g.deposit_linear(&mut pushed, m.branch(i).apply(p), w),
            None => lost += w,
        }
    }
    lost + pushed
        .iter()
        .zip(&em.weights)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::map::{preset_belykh, PieceSpec};

    fn strips() -> MapSpec {
        let piece = |y0: f64, y1: f64, u: f64, v: f64, id| PieceSpec {
            region: Polygon::rect(-1.0, y0, 1.0, y1, id).unwrap(),
            lambda: 0.3,
            gamma: 3.0,
            u,
            v,
        };
        let t = 1.0 / 3.0;
        MapSpec::new(
            "strips",
            1.0,
            vec![
                piece(-1.0, -t, -0.6, 2.0, 1),
                piece(-t, t, 0.0, 0.0, 2),
                piece(t, 1.0, 0.6, -2.0, 3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn point_mass_at_fixed_point_is_invariant() {
        let m = strips();
        let g = Grid::over(&m, 33, 33).unwrap();
        let mut w = vec![0.0; g.len()];
        w[16 * 33 + 16] = 1.0;
        assert_eq!(g.center(16 * 33 + 16), Point::new(0.0, 0.0));
        let em = EmpiricalMeasure::from_weights(g, w).unwrap();
        assert!(invariance_gap(&m, &em) < 1e-12);
    }

    #[test]
    fn gap_is_at_most_two() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let g = Grid::over(&m, 8, 8).unwrap();
        let mut w = vec![0.0; 64];
        w[7] = 1.0;
        let em = EmpiricalMeasure::from_weights(g, w).unwrap();
        let gap = invariance_gap(&m, &em);
        assert!(gap <= 2.0 + 1e-12 && gap > 1.0);
    }

    #[test]
    fn marginals_of_product() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let g = Grid::over(&m, 3, 2).unwrap();
        let (px, py) = ([0.2, 0.3, 0.5], [0.4, 0.6]);
        let w: Vec<f64> = (0..6).map(|k| px[k % 3] * py[k / 3]).collect();
        let em = EmpiricalMeasure::from_weights(g, w).unwrap();
        let mx = marginal(&em, Axis::X1);
        let my = marginal(&em, Axis::X2);
        for (a, b) in mx.weights.iter().zip(px) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in my.weights.iter().zip(py) {
            assert!((a - b).abs() < 1e-15);
        }
        let full = conditional_slab_density(&em, 0.0, 1.0).unwrap();
        assert_eq!(full, mx);
        assert!(matches!(
            conditional_slab_density(&em, 0.0, 0.1),
            Err(Error::EmptySlab { .. })
        ));
    }

    #[test]
    fn grid_indexing() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let g = Grid::over(&m, 4, 4).unwrap();
        assert_eq!(g.index_of(Point::new(-1.0, -1.0)), Some(0));
        assert_eq!(g.index_of(Point::new(1.0, 1.0)), Some(15));
        assert_eq!(g.index_of(Point::new(1.1, 0.0)), None);
        assert_eq!(g.center(5), Point::new(-0.25, -0.25));
    }

    #[test]
    fn pgm_layout() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let g = Grid::over(&m, 2, 2).unwrap();
        let em = EmpiricalMeasure::from_weights(g, vec![0.0, 0.0, 2.0, 1.0]).unwrap();
        let pgm = em.heatmap_pgm();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(&pgm[header.len()..], &[255, 128, 0, 0]);
    }

    #[test]
    fn default_curve_for_belykh() {
        let m = preset_belykh(0.55, 2.0, 0.0).unwrap();
        let c = UnstableCurve::default_for(&m).unwrap();
        assert!(c.sigma1 > 0.0 && c.sigma2 < 1.0);
        assert!(UnstableCurve {
            rho: 0.0,
            sigma1: -0.5,
            sigma2: 0.5
        }
        .validate(&m)
        .is_err());
    }

    #[test]
    fn curve_in_second_piece() {
        let m = preset_belykh(0.55, 2.0, 0.0).unwrap();
        let c = UnstableCurve::default_in(&m, 2).unwrap();
        assert!(c.sigma1 > -1.0 && c.sigma2 < 0.0);
        assert!(UnstableCurve::default_in(&m, 3).is_err());
    }

    #[test]
    fn consistency_of_identical_and_disjoint_measures() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let g = Grid::over(&m, 2, 1).unwrap();
        let mut a = EmpiricalMeasure::from_weights(g, vec![1.0, 0.0]).unwrap();
        let mut b = EmpiricalMeasure::from_weights(g, vec![0.0, 1.0]).unwrap();
        a.sample_count = 800;
        b.sample_count = 800;
        let same = consistency_check(&a, &a).unwrap();
        assert_eq!(same.l1, 0.0);
        assert!(same.within_budget);
        let apart = consistency_check(&a, &b).unwrap();
        assert_eq!(apart.l1, 2.0);
        assert!((apart.budget - 0.1).abs() < 1e-12);
        assert!(!apart.within_budget);
    }
}
