//! Planar primitives with a fixed coincidence tolerance.
//!
//! Everything here works on straight-edged geometry: points, segments with a
//! curve identifier, and simple counter-clockwise polygons. Two points closer
//! than [`EPS_GEOM`] are treated as the same point.

use std::cmp::Ordering;
use std::ops;

use geo::BooleanOps;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coincidence, degeneracy and area tolerance, in domain length units.
pub const EPS_GEOM: f64 = 1e-9;

/// Signed distances below this are treated as "on the line" while clipping.
const CLIP_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl ops::Sub for Point {
    type Output = Point;

    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl ops::Add for Point {
    type Output = Point;

    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Lexicographic order on (x, y).
    pub fn lex_cmp(&self, o: &Point) -> Ordering {
        self.x.total_cmp(&o.x).then(self.y.total_cmp(&o.y))
    }

    fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }
}

/// A straight piece of a boundary curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    /// Identifier of the boundary curve this piece lies on.
    pub curve_id: usize,
}

impl Segment {
    pub fn new(a: Point, b: Point, curve_id: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Degenerate("non-finite segment endpoint".into()));
        }
        if a.dist(b) <= EPS_GEOM {
            return Err(Error::Degenerate(format!(
                "segment ({}, {})-({}, {}) is shorter than tolerance",
                a.x, a.y, b.x, b.y
            )));
        }
        Ok(Segment { a, b, curve_id })
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// |dy/dx|; infinite for vertical segments.
    pub fn abs_slope(&self) -> f64 {
        let d = self.b - self.a;
        (d.y / d.x).abs()
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        point_segment_distance(p, self.a, self.b)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.distance_to(p) <= EPS_GEOM
    }

    fn param_of(&self, p: Point) -> f64 {
        let d = self.b - self.a;
        (p - self.a).dot(d) / d.dot(d)
    }
}

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: &[Point]) -> BBox {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BBox { min, max }
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            min: Point::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    pub fn overlaps(&self, o: &BBox, slack: f64) -> bool {
        self.min.x <= o.max.x + slack
            && o.min.x <= self.max.x + slack
            && self.min.y <= o.max.y + slack
            && o.min.y <= self.max.y + slack
    }

    pub fn contains(&self, p: Point, slack: f64) -> bool {
        p.x >= self.min.x - slack
            && p.x <= self.max.x + slack
            && p.y >= self.min.y - slack
            && p.y <= self.max.y + slack
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// A simple polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    piece_id: usize,
}

impl Polygon {
    /// Builds a polygon, dropping repeated and collinear vertices and
    /// reorienting to counter-clockwise.
    pub fn new(vertices: Vec<Point>, piece_id: usize) -> Result<Self> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::Degenerate("non-finite polygon vertex".into()));
        }
        let mut vs = cleanup_ring(vertices);
        if vs.len() < 3 {
            return Err(Error::Degenerate(
                "fewer than three distinct vertices".into(),
            ));
        }
        let a = signed_area(&vs);
        if a.abs() <= EPS_GEOM * EPS_GEOM {
            return Err(Error::Degenerate(format!(
                "polygon area {a:e} below tolerance"
            )));
        }
        if a < 0.0 {
            vs.reverse();
        }
        if !ring_is_simple(&vs) {
            return Err(Error::Degenerate("polygon is self-intersecting".into()));
        }
        Ok(Polygon {
            vertices: vs,
            piece_id,
        })
    }

    /// Axis-aligned rectangle [x0, x1] x [y0, y1].
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64, piece_id: usize) -> Result<Self> {
        Polygon::new(
            vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
            piece_id,
        )
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn piece_id(&self) -> usize {
        self.piece_id
    }

    pub fn with_piece_id(mut self, piece_id: usize) -> Self {
        self.piece_id = piece_id;
        self
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a2 = 0.0;
        for (p, q) in self.edges() {
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
            a2 += c;
        }
        Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
    }

    /// Edges as (start, end) pairs, closing back to the first vertex.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= 0.0
        })
    }

    /// Even-odd containment; points on the boundary may land either way.
    pub fn contains_point(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Unsigned distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `p` lies in the closed polygon, up to [`EPS_GEOM`].
    pub fn contains_closed(&self, p: Point) -> bool {
        self.contains_point(p) || self.boundary_distance(p) <= EPS_GEOM
    }

    /// Vertex ring rotated to start at its lexicographically smallest vertex.
    pub fn normalized(&self) -> Vec<Point> {
        let start = self
            .vertices
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.lex_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut out = self.vertices[start..].to_vec();
        out.extend_from_slice(&self.vertices[..start]);
        out
    }

    fn to_geo(&self) -> geo::Polygon<f64> {
        let ring: Vec<geo::Coord<f64>> = self
            .vertices
            .iter()
            .map(|p| geo::Coord { x: p.x, y: p.y })
            .collect();
        geo::Polygon::new(geo::LineString::from(ring), vec![])
    }
}

fn signed_area(vs: &[Point]) -> f64 {
    let n = vs.len();
    let mut s = 0.0;
    for i in 0..n {
        s += vs[i].cross(vs[(i + 1) % n]);
    }
    0.5 * s
}

fn cleanup_ring(mut vs: Vec<Point>) -> Vec<Point> {
    loop {
        let n = vs.len();
        if n < 3 {
            return vs;
        }
        let mut keep = vec![true; n];
        let mut changed = false;
        for i in 0..n {
            let prev = vs[(i + n - 1) % n];
            let cur = vs[i];
            let next = vs[(i + 1) % n];
            if cur.dist(prev) <= EPS_GEOM || point_segment_distance(cur, prev, next) <= CLIP_EPS {
                keep[i] = false;
                changed = true;
                // remove one vertex per pass so neighbours stay valid
                break;
            }
        }
        if !changed {
            return vs;
        }
        let mut i = 0;
        vs.retain(|_| {
            let k = keep[i];
            i += 1;
            k
        });
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Whether closed segments ab and cd share a point (no tolerance).
pub(crate) fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

fn ring_is_simple(vs: &[Point]) -> bool {
    let n = vs.len();
    for i in 0..n {
        let (a, b) = (vs[i], vs[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (vs[j], vs[(j + 1) % n]);
            if segments_touch(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Diagonal affine map (x, y) -> (lambda x + u, gamma y + v).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineDiag {
    pub lambda: f64,
    pub gamma: f64,
    pub u: f64,
    pub v: f64,
}

impl AffineDiag {
    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        Point::new(self.lambda * p.x + self.u, self.gamma * p.y + self.v)
    }

    #[inline]
    pub fn apply_inverse(&self, p: Point) -> Point {
        Point::new((p.x - self.u) / self.lambda, (p.y - self.v) / self.gamma)
    }

    pub fn image(&self, poly: &Polygon) -> Result<Polygon> {
        let vs = poly.vertices.iter().map(|&p| self.apply(p)).collect();
        Polygon::new(vs, poly.piece_id)
    }

    pub fn preimage(&self, poly: &Polygon) -> Result<Polygon> {
        let vs = poly
            .vertices
            .iter()
            .map(|&p| self.apply_inverse(p))
            .collect();
        Polygon::new(vs, poly.piece_id)
    }
}

/// Image of `p` under (x, y) -> (lambda x + u, gamma y + v).
pub fn affine_image(p: &Polygon, lambda: f64, gamma: f64, u: f64, v: f64) -> Result<Polygon> {
    if !(lambda > 0.0 && gamma > 0.0) {
        return Err(Error::Parameter(format!(
            "affine scales must be positive, got lambda = {lambda}, gamma = {gamma}"
        )));
    }
    AffineDiag {
        lambda,
        gamma,
        u,
        v,
    }
    .image(p)
}

/// Connected components of interior(p) ∩ interior(q). Components thinner
/// than the area tolerance are dropped. Results carry `p`'s piece id.
pub fn intersect_polygons(p: &Polygon, q: &Polygon) -> Vec<Polygon> {
    if !p.bbox().overlaps(&q.bbox(), 0.0) {
        return Vec::new();
    }
    if q.is_convex() {
        return clip_convex(p, q).into_iter().collect();
    }
    if p.is_convex() {
        return clip_convex(q, p)
            .map(|c| c.with_piece_id(p.piece_id))
            .into_iter()
            .collect();
    }
    let mp = p.to_geo().intersection(&q.to_geo());
    mp.0.iter()
        .filter_map(|g| {
            let mut vs: Vec<Point> = g
                .exterior()
                .coords()
                .map(|c| Point::new(c.x, c.y))
                .collect();
            vs.pop();
            Polygon::new(vs, p.piece_id).ok()
        })
        .collect()
}

/// Sutherland-Hodgman clip of `subject` against convex `clip`.
fn clip_convex(subject: &Polygon, clip: &Polygon) -> Option<Polygon> {
    let mut out: Vec<Point> = subject.vertices.clone();
    for (a, b) in clip.edges() {
        if out.is_empty() {
            return None;
        }
        let dir = b - a;
        let len = dir.norm();
        let side = |p: Point| dir.cross(p - a) / len;
        let input = std::mem::take(&mut out);
        let n = input.len();
        for i in 0..n {
            let s = input[(i + n - 1) % n];
            let e = input[i];
            let ds = side(s);
            let de = side(e);
            let s_in = ds >= -CLIP_EPS;
            let e_in = de >= -CLIP_EPS;
            if e_in {
                if !s_in {
                    out.push(s.lerp(e, ds / (ds - de)));
                }
                out.push(e);
            } else if s_in && ds > CLIP_EPS {
                out.push(s.lerp(e, ds / (ds - de)));
            }
        }
    }
    Polygon::new(out, subject.piece_id).ok()
}

/// How two segments meet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Contact {
    Disjoint,
    Point(Point),
    Overlap(Point, Point),
}

/// Intersection of two segments with tolerance [`EPS_GEOM`].
pub fn segment_contact(s: &Segment, t: &Segment) -> Contact {
    let d1 = s.b - s.a;
    let d2 = t.b - t.a;
    let l1 = d1.norm();
    let l2 = d2.norm();
    let denom = d1.cross(d2);
    let w = t.a - s.a;

    let parallel = denom.abs() <= 1e-12 * l1 * l2;
    if parallel {
        let off = d1.cross(w).abs() / l1;
        if off > EPS_GEOM {
            return Contact::Disjoint;
        }
        let ta = s.param_of(t.a);
        let tb = s.param_of(t.b);
        let lo = ta.min(tb).max(0.0);
        let hi = ta.max(tb).min(1.0);
        let slack = EPS_GEOM / l1;
        if hi < lo - slack {
            return Contact::Disjoint;
        }
        if (hi - lo) * l1 <= EPS_GEOM {
            let m = 0.5 * (lo + hi);
            return Contact::Point(s.a.lerp(s.b, m.clamp(0.0, 1.0)));
        }
        return Contact::Overlap(s.a.lerp(s.b, lo), s.a.lerp(s.b, hi));
    }

    let ts = w.cross(d2) / denom;
    let tt = w.cross(d1) / denom;
    let ss = EPS_GEOM / l1;
    let st = EPS_GEOM / l2;
    if ts >= -ss && ts <= 1.0 + ss && tt >= -st && tt <= 1.0 + st {
        return Contact::Point(s.a.lerp(s.b, ts.clamp(0.0, 1.0)));
    }
    // nearly parallel segments can touch at an endpoint without the
    // supporting lines crossing inside either segment
    for p in [t.a, t.b] {
        if s.contains(p) {
            return Contact::Point(p);
        }
    }
    for p in [s.a, s.b] {
        if t.contains(p) {
            return Contact::Point(p);
        }
    }
    Contact::Disjoint
}

/// Finds a point covered by the largest number of distinct `curve_id`s.
///
/// A segment covers a point when the point is within [`EPS_GEOM`] of it,
/// endpoints included. Among maximizers the lexicographically smallest point
/// wins. Returns `None` for an empty input.
pub fn arrangement_multiplicity(segments: &[Segment]) -> Option<(Point, usize)> {
    if segments.is_empty() {
        return None;
    }
    let n = segments.len();
    let boxes: Vec<BBox> = segments.iter().map(|s| BBox::of(&[s.a, s.b])).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| boxes[i].min.x.total_cmp(&boxes[j].min.x));

    let mut contacts: Vec<Vec<(usize, Contact)>> = vec![Vec::new(); n];
    for (ii, &i) in order.iter().enumerate() {
        for &j in &order[ii + 1..] {
            if boxes[j].min.x > boxes[i].max.x + EPS_GEOM {
                break;
            }
            if !boxes[i].overlaps(&boxes[j], EPS_GEOM) {
                continue;
            }
            let c = segment_contact(&segments[i], &segments[j]);
            if c != Contact::Disjoint {
                contacts[i].push((j, c));
                contacts[j].push((i, c));
            }
        }
    }

    let mut best: Option<(Point, usize)> = None;
    let mut ids: Vec<usize> = Vec::new();
    for (i, s) in segments.iter().enumerate() {
        let mut params = vec![0.0, 1.0];
        for (_, c) in &contacts[i] {
            match *c {
                Contact::Point(p) => params.push(s.param_of(p).clamp(0.0, 1.0)),
                Contact::Overlap(p, q) => {
                    params.push(s.param_of(p).clamp(0.0, 1.0));
                    params.push(s.param_of(q).clamp(0.0, 1.0));
                }
                Contact::Disjoint => {}
            }
        }
        params.sort_by(f64::total_cmp);
        let tol = EPS_GEOM / s.length();
        params.dedup_by(|b, a| (*b - *a).abs() <= tol);

        for &t in &params {
            let p = s.a.lerp(s.b, t);
            ids.clear();
            ids.push(s.curve_id);
            for &(j, _) in &contacts[i] {
                let other = &segments[j];
                if other.contains(p) && !ids.contains(&other.curve_id) {
                    ids.push(other.curve_id);
                }
            }
            let count = ids.len();
            let better = match &best {
                None => true,
                Some((bp, bc)) => count > *bc || (count == *bc && p.lex_cmp(bp) == Ordering::Less),
            };
            if better {
                best = Some((p, count));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polygon {
        Polygon::rect(0.0, 0.0, 1.0, 1.0, 1).unwrap()
    }

    fn assert_ring_eq(a: &[Point], b: &[Point], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (p, q) in a.iter().zip(b) {
            assert!(p.dist(*q) <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identity_image_is_same_square() {
        let sq = square();
        let img = affine_image(&sq, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(img, sq);
    }

    #[test]
    fn scaled_square_becomes_rectangle() {
        let img = affine_image(&square(), 0.5, 2.0, 0.5, -1.0).unwrap();
        let want = Polygon::rect(0.5, -1.0, 1.0, 1.0, 1).unwrap();
        assert_ring_eq(&img.normalized(), &want.normalized(), 1e-15);
        assert!((img.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn affine_rejects_nonpositive_scales() {
        assert!(affine_image(&square(), 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(affine_image(&square(), 1.0, -2.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn degenerate_image_is_an_error() {
        let r = affine_image(&square(), 1e-12, 1e-12, 0.0, 0.0);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(1.0, 1.0),
                Point::new(1.0, 0.0),
            ],
            0,
        )
        .unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let r = Polygon::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn collinear_vertices_are_dropped() {
        let p = Polygon::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.5, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            0,
        )
        .unwrap();
        assert_eq!(p.vertices().len(), 4);
    }

    #[test]
    fn self_intersection_is_idempotent() {
        let sq = square();
        let r = intersect_polygons(&sq, &sq);
        assert_eq!(r.len(), 1);
        assert_ring_eq(&r[0].normalized(), &sq.normalized(), 1e-15);
    }

    #[test]
    fn overlapping_squares() {
        let p = square();
        let q = Polygon::rect(0.5, 0.0, 1.5, 1.0, 2).unwrap();
        let r = intersect_polygons(&p, &q);
        assert_eq!(r.len(), 1);
        let want = Polygon::rect(0.5, 0.0, 1.0, 1.0, 1).unwrap();
        assert_ring_eq(&r[0].normalized(), &want.normalized(), 1e-15);
    }

    #[test]
    fn disjoint_and_touching_squares() {
        let p = square();
        let far = Polygon::rect(2.0, 2.0, 3.0, 3.0, 2).unwrap();
        assert!(intersect_polygons(&p, &far).is_empty());
        let touching = Polygon::rect(1.0, 0.0, 2.0, 1.0, 2).unwrap();
        assert!(intersect_polygons(&p, &touching).is_empty());
    }

    #[test]
    fn nonconvex_intersection_has_two_components() {
        // a U shape cut by a horizontal bar across both prongs
        let u = Polygon::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(3.0, 0.0),
                Point::new(3.0, 3.0),
                Point::new(2.0, 3.0),
                Point::new(2.0, 1.0),
                Point::new(1.0, 1.0),
                Point::new(1.0, 3.0),
                Point::new(0.0, 3.0),
            ],
            7,
        )
        .unwrap();
        let bar = Polygon::new(
            vec![
                Point::new(-1.0, 2.0),
                Point::new(4.0, 2.0),
                Point::new(4.0, 2.5),
                Point::new(3.5, 2.5),
                Point::new(3.5, 2.4),
                Point::new(-1.0, 2.5),
            ],
            8,
        )
        .unwrap();
        assert!(!bar.is_convex());
        let r = intersect_polygons(&u, &bar);
        assert_eq!(r.len(), 2);
        let total: f64 = r.iter().map(|c| c.area()).sum();
        // the bar's top edge is slanted: 0.8 + 4/45 inside the two arms
        assert!((total - 8.0 / 9.0).abs() < 1e-8, "total = {total}");
        assert!(r.iter().all(|c| c.piece_id() == 7));
    }

    #[test]
    fn crossing_diagonals_meet_at_center() {
        let s = [
            Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0), 0).unwrap(),
            Segment::new(Point::new(0.0, 1.0), Point::new(1.0, 0.0), 1).unwrap(),
        ];
        let (p, c) = arrangement_multiplicity(&s).unwrap();
        assert_eq!(c, 2);
        assert!(p.dist(Point::new(0.5, 0.5)) < 1e-12);
    }

    #[test]
    fn concurrent_segments_through_origin() {
        let n = 7;
        let segs: Vec<Segment> = (0..n)
            .map(|i| {
                let th = std::f64::consts::PI * i as f64 / n as f64;
                let d = Point::new(th.cos(), th.sin());
                Segment::new(d.scale(-1.0), d, i).unwrap()
            })
            .collect();
        let (p, c) = arrangement_multiplicity(&segs).unwrap();
        assert_eq!(c, n);
        assert!(p.norm() < 1e-12);
    }

    #[test]
    fn same_curve_counts_once() {
        let s = [
            Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 0.0), 3).unwrap(),
            Segment::new(Point::new(1.0, 0.0), Point::new(1.0, 1.0), 3).unwrap(),
        ];
        assert_eq!(arrangement_multiplicity(&s).unwrap().1, 1);
        let s2 = [
            s[0],
            Segment {
                curve_id: 4,
                ..s[1]
            },
        ];
        let (p, c) = arrangement_multiplicity(&s2).unwrap();
        assert_eq!(c, 2);
        assert!(p.dist(Point::new(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn ties_resolve_to_smallest_point() {
        let s = [
            Segment::new(Point::new(2.0, 0.0), Point::new(3.0, 0.0), 0).unwrap(),
            Segment::new(Point::new(0.0, 5.0), Point::new(0.0, 6.0), 1).unwrap(),
        ];
        let (p, c) = arrangement_multiplicity(&s).unwrap();
        assert_eq!(c, 1);
        assert_eq!(p, Point::new(0.0, 5.0));
    }

    #[test]
    fn collinear_overlap_counts_both_curves() {
        let s = [
            Segment::new(Point::new(0.0, 0.0), Point::new(2.0, 0.0), 0).unwrap(),
            Segment::new(Point::new(1.0, 0.0), Point::new(3.0, 0.0), 1).unwrap(),
        ];
        let (p, c) = arrangement_multiplicity(&s).unwrap();
        assert_eq!(c, 2);
        assert!(p.dist(Point::new(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn short_segment_rejected() {
        assert!(Segment::new(Point::new(0.0, 0.0), Point::new(0.0, 1e-12), 0).is_err());
    }

    #[test]
    fn point_round_trips_as_pair() {
        let s = serde_json::to_string(&Point::new(1.5, -2.0)).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        let p: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(p, Point::new(1.5, -2.0));
    }
}
