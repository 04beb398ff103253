//! Piecewise affine hyperbolic maps.
//!
//! A [`MapSpec`] is a finite family of open polygonal pieces `K_i` covering a
//! domain `K`, each carrying a diagonal affine branch
//! `(x1, x2) -> (lambda_i x1 + u_i, gamma_i x2 + v_i)` with
//! `0 < lambda_i < 1 < gamma_i`. The map is undefined on the common boundary
//! of two pieces. Points on the outer border of `K` that touch a single piece
//! are mapped by that piece's branch.
//!
//! Piece indices in the public API are 1-based.

mod gate;
mod orbit;
mod presets;

pub use gate::{gate_corollary, gate_theorem, ConditionCheck, GateReport, ParameterWindow};
pub use orbit::{orbit, BoundaryPolicy, Orbit};
pub use presets::{preset_belykh, preset_fat_baker};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{intersect_polygons, AffineDiag, BBox, Point, Polygon, EPS_GEOM};

/// One piece `K_i` with its affine branch.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceSpec {
    pub region: Polygon,
    pub lambda: f64,
    pub gamma: f64,
    pub u: f64,
    pub v: f64,
}

impl PieceSpec {
    pub fn branch(&self) -> AffineDiag {
        AffineDiag {
            lambda: self.lambda,
            gamma: self.gamma,
            u: self.u,
            v: self.v,
        }
    }
}

/// A point of the lifted domain `K x [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl LiftedPoint {
    pub fn project(&self) -> Point {
        Point::new(self.x1, self.x2)
    }
}

/// Where a point sits relative to the pieces (0-based piece index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Location {
    Interior(usize),
    /// On the outer border of `K`, in the closure of exactly one piece.
    Border(usize),
    Discontinuity,
    Outside,
}

impl Location {
    #[inline]
    pub(crate) fn piece(self) -> Option<usize> {
        match self {
            Location::Interior(i) | Location::Border(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
struct EdgeLine {
    a: Point,
    b: Point,
    // inward unit normal and offset: signed distance = n . p - c
    nx: f64,
    ny: f64,
    c: f64,
}

#[derive(Clone, Debug)]
struct PieceShape {
    bbox: BBox,
    convex: bool,
    edges: Vec<EdgeLine>,
}

impl PieceShape {
    fn new(poly: &Polygon) -> Self {
        let edges = poly
            .edges()
            .map(|(a, b)| {
                let d = b - a;
                let len = d.norm();
                let (nx, ny) = (-d.y / len, d.x / len);
                EdgeLine {
                    a,
                    b,
                    nx,
                    ny,
                    c: nx * a.x + ny * a.y,
                }
            })
            .collect();
        PieceShape {
            bbox: poly.bbox(),
            convex: poly.is_convex(),
            edges,
        }
    }

    /// (strictly inside with margin, inside the eps-closure)
    #[inline]
    fn classify(&self, p: Point, poly: &Polygon) -> (bool, bool) {
        if self.convex {
            let mut min_d = f64::INFINITY;
            for e in &self.edges {
                let d = e.nx * p.x + e.ny * p.y - e.c;
                if d < min_d {
                    min_d = d;
                }
            }
            (min_d > EPS_GEOM, min_d >= -EPS_GEOM)
        } else {
            let inside = poly.contains_point(p);
            let dist = self
                .edges
                .iter()
                .map(|e| crate::geometry::point_segment_distance(p, e.a, e.b))
                .fold(f64::INFINITY, f64::min);
            (inside && dist > EPS_GEOM, inside || dist <= EPS_GEOM)
        }
    }
}

/// A validated piecewise affine hyperbolic map.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MapSpecRepr", into = "MapSpecRepr")]
pub struct MapSpec {
    name: String,
    slope_bound: f64,
    pieces: Vec<PieceSpec>,
    shapes: Vec<PieceShape>,
    bbox: BBox,
    area: f64,
}

impl PartialEq for MapSpec {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.slope_bound == o.slope_bound && self.pieces == o.pieces
    }
}

impl MapSpec {
    /// Validates and builds a map. Checks: at least two pieces, rates in
    /// range, distinct stable translations, disjoint piece interiors, the
    /// slope bound on internal boundaries, and `f(K_i) ⊆ K`.
    pub fn new(name: impl Into<String>, slope_bound: f64, pieces: Vec<PieceSpec>) -> Result<Self> {
        let name = name.into();
        if pieces.len() < 2 {
            return Err(Error::InvalidMap(format!(
                "need at least two pieces, got {}",
                pieces.len()
            )));
        }
        if !(slope_bound.is_finite() && slope_bound > 0.0) {
            return Err(Error::InvalidMap(format!(
                "slope bound {slope_bound} must be positive"
            )));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.lambda > 0.0 && p.lambda < 1.0) {
                return Err(Error::InvalidMap(format!(
                    "piece {}: lambda = {} not in (0, 1)",
                    i + 1,
                    p.lambda
                )));
            }
            if !(p.gamma > 1.0 && p.gamma.is_finite()) {
                return Err(Error::InvalidMap(format!(
                    "piece {}: gamma = {} must exceed 1",
                    i + 1,
                    p.gamma
                )));
            }
            if !(p.u.is_finite() && p.v.is_finite()) {
                return Err(Error::InvalidMap(format!(
                    "piece {}: non-finite translation",
                    i + 1
                )));
            }
        }
        for i in 0..pieces.len() {
            for j in (i + 1)..pieces.len() {
                if (pieces[i].u - pieces[j].u).abs() <= EPS_GEOM {
                    return Err(Error::InvalidMap(format!(
                        "pieces {} and {} share the stable translation u = {}",
                        i + 1,
                        j + 1,
                        pieces[i].u
                    )));
                }
            }
        }

        let area: f64 = pieces.iter().map(|p| p.region.area()).sum();
        for i in 0..pieces.len() {
            for j in (i + 1)..pieces.len() {
                let overlap: f64 = intersect_polygons(&pieces[i].region, &pieces[j].region)
                    .iter()
                    .map(Polygon::area)
                    .sum();
                if overlap > 1e-12 * area {
                    return Err(Error::InvalidMap(format!(
                        "pieces {} and {} overlap (area {overlap:e})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }

        // internal boundaries are the edges shared with another piece
        for (i, p) in pieces.iter().enumerate() {
            for (a, b) in p.region.edges() {
                let mid = (a + b).scale(0.5);
                let shared = pieces
                    .iter()
                    .enumerate()
                    .any(|(j, q)| j != i && q.region.boundary_distance(mid) <= EPS_GEOM);
                if !shared {
                    continue;
                }
                let d = b - a;
                let slope = (d.y / d.x).abs();
                if !(slope < slope_bound) {
                    return Err(Error::InvalidMap(format!(
                        "piece {}: boundary slope {slope} violates bound H = {slope_bound}",
                        i + 1
                    )));
                }
            }
        }

        for (i, p) in pieces.iter().enumerate() {
            let img = p.branch().image(&p.region)?;
            let inside: f64 = pieces
                .iter()
                .flat_map(|q| intersect_polygons(&img, &q.region))
                .map(|c| c.area())
                .sum();
            let perimeter: f64 = img.edges().map(|(a, b)| a.dist(b)).sum();
            if img.area() - inside > EPS_GEOM * perimeter {
                return Err(Error::InvalidMap(format!(
                    "image of piece {} leaves the domain (area {:e} outside)",
                    i + 1,
                    img.area() - inside
                )));
            }
        }

        let shapes: Vec<PieceShape> = pieces.iter().map(|p| PieceShape::new(&p.region)).collect();
        let bbox = shapes
            .iter()
            .map(|s| s.bbox)
            .reduce(|a, b| a.union(&b))
            .expect("at least two pieces");
        Ok(MapSpec {
            name,
            slope_bound,
            pieces,
            shapes,
            bbox,
            area,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn slope_bound(&self) -> f64 {
        self.slope_bound
    }

    pub fn pieces(&self) -> &[PieceSpec] {
        &self.pieces
    }

    /// Number of pieces `a`.
    pub fn alphabet_size(&self) -> usize {
        self.pieces.len()
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Area of `K`.
    pub fn domain_area(&self) -> f64 {
        self.area
    }

    pub fn lambda_min(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.lambda)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.lambda)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn gamma_min(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.gamma)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn gamma_max(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.gamma)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lift parameter used when none is given: the midpoint of (0, 1/(a+1)).
    pub fn default_theta(&self) -> f64 {
        0.5 / (self.pieces.len() + 1) as f64
    }

    /// Same map with pieces reordered so that new piece `k` is old piece `perm[k]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.pieces.len()];
        if perm.len() != self.pieces.len() || perm.iter().any(|&i| i >= seen.len()) {
            return Err(Error::Parameter("relabeling is not a permutation".into()));
        }
        for &i in perm {
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Parameter("relabeling is not a permutation".into()));
            }
        }
        let pieces = perm
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let mut p = self.pieces[i].clone();
                p.region = p.region.with_piece_id(k + 1);
                p
            })
            .collect();
        MapSpec::new(self.name.clone(), self.slope_bound, pieces)
    }

    #[inline]
    pub(crate) fn locate(&self, p: Point) -> Location {
        if !self.bbox.contains(p, EPS_GEOM) {
            return Location::Outside;
        }
        let mut hit = None;
        let mut hits = 0;
        for (i, s) in self.shapes.iter().enumerate() {
            if !s.bbox.contains(p, EPS_GEOM) {
                continue;
            }
            let (strict, closed) = s.classify(p, &self.pieces[i].region);
            if strict {
                return Location::Interior(i);
            }
            if closed {
                hits += 1;
                hit = Some(i);
            }
        }
        match (hits, hit) {
            (1, Some(i)) => Location::Border(i),
            (0, _) => Location::Outside,
            _ => Location::Discontinuity,
        }
    }

    #[inline]
    pub(crate) fn branch(&self, i: usize) -> AffineDiag {
        self.pieces[i].branch()
    }

    fn located_piece(&self, p: Point) -> Result<usize> {
        match self.locate(p) {
            Location::Interior(i) | Location::Border(i) => Ok(i),
            Location::Discontinuity => Err(Error::OnDiscontinuity(p)),
            Location::Outside => Err(Error::OutsideDomain(p)),
        }
    }

    /// 1-based index of the piece containing `p`.
    pub fn piece_of(&self, p: Point) -> Result<usize> {
        self.located_piece(p).map(|i| i + 1)
    }

    /// `f(p)` and the 1-based piece whose branch was used.
    pub fn apply(&self, p: Point) -> Result<(Point, usize)> {
        let i = self.located_piece(p)?;
        Ok((self.pieces[i].branch().apply(p), i + 1))
    }

    /// The injective lift `(x1, x2, x3) -> (f(x1, x2), theta x3 + i/(a+1))`.
    pub fn lift_apply(&self, theta: f64, q: LiftedPoint) -> Result<LiftedPoint> {
        let a1 = (self.pieces.len() + 1) as f64;
        if !(theta > 0.0 && theta < 1.0 / a1) {
            return Err(Error::Parameter(format!(
                "theta = {theta} must lie in (0, 1/{a1})"
            )));
        }
        if !(0.0..=1.0).contains(&q.x3) {
            return Err(Error::Parameter(format!("x3 = {} not in [0, 1]", q.x3)));
        }
        let (img, piece) = self.apply(q.project())?;
        Ok(LiftedPoint {
            x1: img.x,
            x2: img.y,
            x3: theta * q.x3 + piece as f64 / a1,
        })
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct PieceRepr {
    polygon: Vec<Point>,
    lambda: f64,
    gamma: f64,
    u: f64,
    v: f64,
}

#[derive(Clone, Serialize, Deserialize)]
struct MapSpecRepr {
    name: String,
    slope_bound: f64,
    pieces: Vec<PieceRepr>,
}

impl TryFrom<MapSpecRepr> for MapSpec {
    type Error = Error;

    fn try_from(r: MapSpecRepr) -> Result<Self> {
        let pieces = r
            .pieces
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(PieceSpec {
                    region: Polygon::new(p.polygon, i + 1)?,
                    lambda: p.lambda,
                    gamma: p.gamma,
                    u: p.u,
                    v: p.v,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MapSpec::new(r.name, r.slope_bound, pieces)
    }
}

impl From<MapSpec> for MapSpecRepr {
    fn from(m: MapSpec) -> Self {
        MapSpecRepr {
            name: m.name,
            slope_bound: m.slope_bound,
            pieces: m
                .pieces
                .into_iter()
                .map(|p| PieceRepr {
                    polygon: p.region.vertices().to_vec(),
                    lambda: p.lambda,
                    gamma: p.gamma,
                    u: p.u,
                    v: p.v,
                })
                .collect(),
        }
    }
}
