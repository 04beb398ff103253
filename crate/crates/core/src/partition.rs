//! Refined partitions by itinerary.
//!
//! The depth-`k` partition has one cell per connected component of the set
//! of points whose first `k + 1` iterates land in prescribed pieces. Cells are
//! built by pulling back: a depth-`k+1` cell with word `i w` is a component
//! of `K_i ∩ f_i^{-1}(C_w)` for a depth-`k` cell `C_w`.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    arrangement_multiplicity, intersect_polygons, Point, Polygon, Segment, EPS_GEOM,
};
use crate::map::MapSpec;

/// Default limit on the number of cells in a partition.
pub const DEFAULT_CELL_CAP: usize = 1_000_000;

/// Components smaller than this fraction of `area(K)` are dropped.
pub const SLIVER_FRACTION: f64 = 1e-12;

/// One cell with its itinerary word (1-based symbols, first symbol is the
/// piece containing the cell).
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub word: Vec<u16>,
    pub polygon: Polygon,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    depth: usize,
    cells: Vec<Cell>,
    boundary: Vec<Segment>,
    dropped_slivers: usize,
}

impl Partition {
    /// The depth-0 partition: the pieces themselves.
    pub fn initial(m: &MapSpec) -> Self {
        let cells = m
            .pieces()
            .iter()
            .enumerate()
            .map(|(i, p)| Cell {
                word: vec![(i + 1) as u16],
                polygon: p.region.clone().with_piece_id(i + 1),
            })
            .collect::<Vec<_>>();
        let boundary = boundary_segments(&cells);
        Partition {
            depth: 0,
            cells,
            boundary,
            dropped_slivers: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Boundary of all cells, merged along supporting lines. Each line gets
    /// its own `curve_id`.
    pub fn boundary(&self) -> &[Segment] {
        &self.boundary
    }

    /// Components below the sliver cutoff dropped over all refinement steps.
    pub fn dropped_slivers(&self) -> usize {
        self.dropped_slivers
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.polygon.area()).sum()
    }

    /// The cell whose interior contains `p` with margin `EPS_GEOM`.
    pub fn cell_containing(&self, p: Point) -> Option<&Cell> {
        self.cells.iter().find(|c| {
            c.polygon.bbox().contains(p, 0.0)
                && c.polygon.contains_point(p)
                && c.polygon.boundary_distance(p) > EPS_GEOM
        })
    }

    pub fn export(&self) -> PartitionExport {
        PartitionExport {
            depth: self.depth,
            cells: self
                .cells
                .iter()
                .map(|c| CellExport {
                    word: c.word.clone(),
                    polygon: c.polygon.vertices().to_vec(),
                })
                .collect(),
            boundary: self.boundary.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellExport {
    pub word: Vec<u16>,
    pub polygon: Vec<Point>,
}

/// JSON shape `{depth, cells: [{word, polygon}], boundary: [{a, b, curve_id}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionExport {
    pub depth: usize,
    pub cells: Vec<CellExport>,
    pub boundary: Vec<Segment>,
}

fn cmp_cells(a: &Cell, b: &Cell) -> Ordering {
    a.word.cmp(&b.word).then_with(|| {
        let va = a.polygon.normalized();
        let vb = b.polygon.normalized();
        va[0].lex_cmp(&vb[0])
    })
}

/// One refinement step with the default cell cap.
pub fn refine_once(m: &MapSpec, z: &Partition) -> Result<Partition> {
    refine_once_capped(m, z, DEFAULT_CELL_CAP)
}

pub fn refine_once_capped(m: &MapSpec, z: &Partition, cap: usize) -> Result<Partition> {
    let a = m.alphabet_size();
    if let Some(c) = z
        .cells
        .iter()
        .find(|c| c.word.len() != z.depth + 1 || c.word.iter().any(|&s| s == 0 || s as usize > a))
    {
        return Err(Error::Precondition(format!(
            "cell word {:?} does not fit a depth-{} partition of a {a}-piece map",
            c.word, z.depth
        )));
    }
    let cutoff = SLIVER_FRACTION * m.domain_area();
    let pieces = m.pieces();
    let pulled: Vec<Result<(Vec<Cell>, usize)>> = z
        .cells
        .par_iter()
        .flat_map_iter(|cell| {
            pieces.iter().enumerate().map(move |(i, piece)| {
                let pre = piece.branch().preimage(&cell.polygon)?;
                let mut kept = Vec::new();
                let mut dropped = 0;
                for comp in intersect_polygons(&piece.region, &pre) {
                    if comp.area() < cutoff {
                        dropped += 1;
                        continue;
                    }
                    let mut word = Vec::with_capacity(cell.word.len() + 1);
                    word.push((i + 1) as u16);
                    word.extend_from_slice(&cell.word);
                    kept.push(Cell {
                        word,
                        polygon: comp.with_piece_id(i + 1),
                    });
                }
                Ok((kept, dropped))
            })
        })
        .collect();

    let mut cells = Vec::new();
    let mut dropped_slivers = z.dropped_slivers;
    for r in pulled {
        let (kept, dropped) = r?;
        dropped_slivers += dropped;
        cells.extend(kept);
        if cells.len() > cap {
            return Err(Error::CellCap {
                count: cells.len(),
                cap,
            });
        }
    }
    cells.par_sort_by(cmp_cells);
    let boundary = boundary_segments(&cells);
    Ok(Partition {
        depth: z.depth + 1,
        cells,
        boundary,
        dropped_slivers,
    })
}

/// `refine_once` applied `k` times to the initial partition.
pub fn refine_to_depth(m: &MapSpec, k: usize) -> Result<Partition> {
    refine_to_depth_capped(m, k, DEFAULT_CELL_CAP)
}

pub fn refine_to_depth_capped(m: &MapSpec, k: usize, cap: usize) -> Result<Partition> {
    let mut z = Partition::initial(m);
    for _ in 0..k {
        z = refine_once_capped(m, &z, cap)?;
    }
    Ok(z)
}

struct EdgeRec {
    angle: f64,
    offset: f64,
    lo: (f64, Point),
    hi: (f64, Point),
}

/// Merges all cell edges into maximal segments per supporting line.
fn boundary_segments(cells: &[Cell]) -> Vec<Segment> {
    let mut edges: Vec<EdgeRec> = cells
        .iter()
        .flat_map(|c| c.polygon.edges())
        .map(|(a, b)| {
            let mut angle = (b.y - a.y).atan2(b.x - a.x);
            // fold directions into (-pi/2, pi/2]
            if angle > FRAC_PI_2 + 1e-12 {
                angle -= std::f64::consts::PI;
            } else if angle <= -FRAC_PI_2 + 1e-12 {
                angle += std::f64::consts::PI;
            }
            let d = Point::new(angle.cos(), angle.sin());
            let n = Point::new(-d.y, d.x);
            let (ta, tb) = (d.dot(a), d.dot(b));
            let (lo, hi) = if ta <= tb {
                ((ta, a), (tb, b))
            } else {
                ((tb, b), (ta, a))
            };
            EdgeRec {
                angle,
                offset: n.dot(a),
                lo,
                hi,
            }
        })
        .collect();
    edges.sort_by(|x, y| {
        x.angle
            .total_cmp(&y.angle)
            .then(x.offset.total_cmp(&y.offset))
            .then(x.lo.0.total_cmp(&y.lo.0))
    });

    // group by angle first, then by offset within each angle group
    let mut groups: Vec<Vec<EdgeRec>> = Vec::new();
    let mut by_angle: Vec<Vec<EdgeRec>> = Vec::new();
    for e in edges {
        match by_angle.last_mut() {
            Some(g) if (e.angle - g[g.len() - 1].angle).abs() <= 1e-9 => g.push(e),
            _ => by_angle.push(vec![e]),
        }
    }
    for mut g in by_angle {
        g.sort_by(|x, y| {
            x.offset
                .total_cmp(&y.offset)
                .then(x.lo.0.total_cmp(&y.lo.0))
        });
        for e in g {
            match groups.last_mut() {
                Some(l) if (e.offset - l[l.len() - 1].offset).abs() <= EPS_GEOM => l.push(e),
                _ => groups.push(vec![e]),
            }
        }
    }

    let mut out = Vec::new();
    for (curve_id, mut g) in groups.into_iter().enumerate() {
        g.sort_by(|x, y| x.lo.0.total_cmp(&y.lo.0));
        let mut cur: Option<((f64, Point), (f64, Point))> = None;
        for e in g {
            cur = match cur {
                Some((lo, hi)) if e.lo.0 <= hi.0 + EPS_GEOM => {
                    Some((lo, if e.hi.0 > hi.0 { e.hi } else { hi }))
                }
                Some((lo, hi)) => {
                    out.extend(Segment::new(lo.1, hi.1, curve_id).ok());
                    Some((e.lo, e.hi))
                }
                None => Some((e.lo, e.hi)),
            };
        }
        if let Some((lo, hi)) = cur {
            out.extend(Segment::new(lo.1, hi.1, curve_id).ok());
        }
    }
    out
}

fn multiplicity(m: &MapSpec, z: &Partition) -> (usize, Point) {
    arrangement_multiplicity(z.boundary()).map_or((0, m.bbox().min), |(p, d)| (d, p))
}

/// Maximal number of distinct boundary lines of the depth-`tau` partition
/// through one point, with a point where it is attained.
pub fn compute_d_tau(m: &MapSpec, tau: usize) -> Result<(usize, Point)> {
    if tau < 1 {
        return Err(Error::Parameter("tau must be at least 1".into()));
    }
    let z = refine_to_depth(m, tau)?;
    Ok(multiplicity(m, &z))
}

/// Evidence that `gamma_min^tau > D_tau + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A2Cert {
    pub tau: usize,
    #[serde(rename = "D_tau")]
    pub d_tau: usize,
    pub gamma_min: f64,
    /// `gamma_min^tau - D_tau - 1`.
    pub margin: f64,
    pub witness: Point,
}

impl A2Cert {
    pub fn passes(&self) -> bool {
        self.margin > 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum A2Outcome {
    Pass(A2Cert),
    /// Every `(tau, D_tau)` pair tried.
    Fail {
        tried: Vec<(usize, usize)>,
    },
}

/// Finds the smallest `tau <= tau_max` with `gamma_min^tau > D_tau + 1`.
pub fn check_a2(m: &MapSpec, tau_max: usize) -> Result<A2Outcome> {
    if tau_max < 1 {
        return Err(Error::Parameter("tau_max must be at least 1".into()));
    }
    let gamma_min = m.gamma_min();
    let mut tried = Vec::new();
    let mut z = Partition::initial(m);
    for tau in 1..=tau_max {
        z = refine_once(m, &z)?;
        let (d, witness) = multiplicity(m, &z);
        let margin = gamma_min.powi(tau as i32) - d as f64 - 1.0;
        if margin > 0.0 {
            return Ok(A2Outcome::Pass(A2Cert {
                tau,
                d_tau: d,
                gamma_min,
                margin,
                witness,
            }));
        }
        tried.push((tau, d));
    }
    Ok(A2Outcome::Fail { tried })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::preset_belykh;

    #[test]
    fn depth_zero_is_the_pieces() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let z = refine_to_depth(&m, 0).unwrap();
        assert_eq!(z.cells().len(), 2);
        assert_eq!(z.cells()[0].word, vec![1]);
        assert_eq!(z.cells()[0].polygon, m.pieces()[0].region);
        // square sides plus the cut
        let ids: std::collections::BTreeSet<usize> =
            z.boundary().iter().map(|s| s.curve_id).collect();
        assert_eq!(ids.len(), 5);
    }

    #[test]
    fn belykh_horizontal_strips() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let z = refine_to_depth(&m, 2).unwrap();
        assert_eq!(z.cells().len(), 8);
        for c in z.cells() {
            assert!((c.polygon.area() - 0.5).abs() < 1e-12);
            assert_eq!(c.polygon.piece_id(), c.word[0] as usize);
        }
        assert!((z.total_area() - 4.0).abs() < 1e-12);
        // 7 interior horizontals, top and bottom, two sides
        assert_eq!(z.boundary().len(), 11);
    }

    #[test]
    fn belykh_d_tau_and_a2() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        assert_eq!(compute_d_tau(&m, 1).unwrap().0, 2);
        match check_a2(&m, 5).unwrap() {
            A2Outcome::Pass(c) => {
                assert_eq!((c.tau, c.d_tau), (2, 2));
                assert!((c.margin - 1.0).abs() < 1e-12);
                assert!(c.passes());
            }
            other => panic!("expected pass, got {other:?}"),
        }
    }

    #[test]
    fn weak_expansion_fails_a2() {
        let m = preset_belykh(0.5, 1.01, 0.0).unwrap();
        match check_a2(&m, 3).unwrap() {
            A2Outcome::Fail { tried } => {
                assert_eq!(tried.len(), 3);
                assert!(tried.iter().all(|&(_, d)| d >= 2));
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn cap_is_enforced() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        assert!(matches!(
            refine_to_depth_capped(&m, 3, 10),
            Err(Error::CellCap { cap: 10, .. })
        ));
    }

    #[test]
    fn zero_tau_is_rejected() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        assert!(compute_d_tau(&m, 0).is_err());
        assert!(check_a2(&m, 0).is_err());
    }

    #[test]
    fn export_shape() {
        let m = preset_belykh(0.5, 2.0, 0.0).unwrap();
        let z = refine_to_depth(&m, 1).unwrap();
        let v = serde_json::to_value(z.export()).unwrap();
        assert_eq!(v["depth"], 1);
        assert!(v["cells"][0]["word"].is_array());
        assert!(v["cells"][0]["polygon"][0].is_array());
        assert!(v["boundary"][0]["a"].is_array());
        assert!(v["boundary"][0]["curve_id"].is_u64());
    }
}
