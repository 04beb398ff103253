use serde::{Deserialize, Serialize};

use super::{Location, MapSpec};
use crate::geometry::Point;

/// What to do when an iterate lands on the discontinuity set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Stop and return the partial orbit.
    Halt,
    /// Nudge the point along the unstable (x2) axis by `epsilon`, doubling
    /// the nudge until the point leaves the boundary neighbourhood.
    Perturb { epsilon: f64 },
}

impl BoundaryPolicy {
    pub const DEFAULT_EPSILON: f64 = 1e-12;

    pub fn perturb() -> Self {
        BoundaryPolicy::Perturb {
            epsilon: Self::DEFAULT_EPSILON,
        }
    }
}

impl Default for BoundaryPolicy {
    fn default() -> Self {
        BoundaryPolicy::perturb()
    }
}

/// Iterates `x_0, ..., x_steps` with their 1-based pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub points: Vec<(Point, usize)>,
    pub halted: bool,
    pub perturbations: usize,
}

// nudges grow up to epsilon * 2^MAX_DOUBLINGS
const MAX_DOUBLINGS: i32 = 24;

impl MapSpec {
    /// Resolves `p` to a point with a well-defined piece (0-based), applying
    /// the boundary policy. The flag reports whether `p` was moved.
    #[inline]
    pub(crate) fn settle(&self, p: Point, policy: BoundaryPolicy) -> Option<(Point, usize, bool)> {
        if let Some(i) = self.locate(p).piece() {
            return Some((p, i, false));
        }
        let BoundaryPolicy::Perturb { epsilon } = policy else {
            return None;
        };
        let mut step = epsilon;
        for _ in 0..=MAX_DOUBLINGS {
            for sign in [1.0, -1.0] {
                let q = Point::new(p.x, p.y + sign * step);
                if let Location::Interior(i) | Location::Border(i) = self.locate(q) {
                    return Some((q, i, true));
                }
            }
            step *= 2.0;
        }
        None
    }
}

/// Forward orbit of `p` for `steps` iterations.
///
/// Under [`BoundaryPolicy::Halt`] the orbit stops before the first iterate
/// that has no piece, and `halted` is set.
pub fn orbit(m: &MapSpec, p: Point, steps: usize, policy: BoundaryPolicy) -> Orbit {
    let mut out = Orbit {
        points: Vec::with_capacity(steps + 1),
        halted: false,
        perturbations: 0,
    };
    let Some((mut x, mut i, moved)) = m.settle(p, policy) else {
        out.halted = true;
        return out;
    };
    out.perturbations += moved as usize;
    out.points.push((x, i + 1));
    for _ in 0..steps {
        let y = m.branch(i).apply(x);
        match m.settle(y, policy) {
            Some((q, j, moved)) => {
                out.perturbations += moved as usize;
                x = q;
                i = j;
                out.points.push((x, i + 1));
            }
            None => {
                out.halted = true;
                break;
            }
        }
    }
    out
}
