#![allow(dead_code)]

use hypaff_core::{MapSpec, PieceSpec, Point, Polygon, Segment};

/// Distance from `p` to the closed segment `ab`.
pub fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    ((a.x + t * dx - p.x).powi(2) + (a.y + t * dy - p.y).powi(2)).sqrt()
}

/// Quadratic oracle for the maximal number of distinct curve ids through a
/// point: candidates are all endpoints and all pairwise line crossings.
pub fn brute_force_multiplicity(segs: &[Segment]) -> usize {
    let mut candidates: Vec<Point> = segs.iter().flat_map(|s| [s.a, s.b]).collect();
    for (i, s) in segs.iter().enumerate() {
        for t in &segs[i + 1..] {
            let (r, q) = (
                Point::new(s.b.x - s.a.x, s.b.y - s.a.y),
                Point::new(t.b.x - t.a.x, t.b.y - t.a.y),
            );
            let den = r.x * q.y - r.y * q.x;
            if den.abs() < 1e-14 {
                continue;
            }
            let (wx, wy) = (t.a.x - s.a.x, t.a.y - s.a.y);
            let u = (wx * q.y - wy * q.x) / den;
            candidates.push(Point::new(s.a.x + u * r.x, s.a.y + u * r.y));
        }
    }
    let mut best = 0;
    for p in candidates {
        let mut ids: Vec<usize> = segs
            .iter()
            .filter(|s| seg_dist(p, s.a, s.b) <= 1e-9)
            .map(|s| s.curve_id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        best = best.max(ids.len());
    }
    best
}

/// Three horizontal strips, each mapped onto the full square; the middle
/// branch fixes the origin.
pub fn strips_map() -> MapSpec {
    let t = 1.0 / 3.0;
    let piece = |y0: f64, y1: f64, u: f64, v: f64, id| PieceSpec {
        region: Polygon::rect(-1.0, y0, 1.0, y1, id).unwrap(),
        lambda: 0.3,
        gamma: 3.0,
        u,
        v,
    };
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
