//! Piecewise affine hyperbolic maps of the plane.
//!
//! The crate covers map construction and validation ([`map`]), partitions
//! refined by itinerary and the boundary multiplicity check ([`partition`]),
//! power-series transversality certificates ([`transversality`]), symbolic
//! coding ([`symbolic`]), and empirical SBR-measure estimation ([`measure`]).

// `!(x > 0.0)` guards deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod fit;
pub mod geometry;
pub mod map;
pub mod measure;
pub mod partition;
pub mod symbolic;
pub mod transversality;

pub use error::{Error, ErrorKind, Result};
pub use geometry::{
    affine_image, arrangement_multiplicity, intersect_polygons, AffineDiag, BBox, Point, Polygon,
    Segment, EPS_GEOM,
};
pub use map::{
    gate_corollary, gate_theorem, orbit, preset_belykh, preset_fat_baker, BoundaryPolicy,
    GateReport, LiftedPoint, MapSpec, Orbit, PieceSpec,
};
pub use measure::{
    correlation_decay, estimate_sbr, EmpiricalMeasure, Grid, Observable, SbrConfig, UnstableCurve,
};
pub use partition::{
    check_a2, compute_d_tau, refine_once, refine_to_depth, A2Cert, A2Outcome, Partition,
};
pub use symbolic::{enumerate_words, itinerary_of, separation_series, stable_coordinate, Word};
pub use transversality::{compute_delta, verify_implication, SeriesSpec, TransversalityCert};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
