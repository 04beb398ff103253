use thiserror::Error;

use crate::geometry::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: parameters, preconditions, geometry.
    Validation,
    /// A size cap was exceeded.
    Resource,
    /// A computation ran but did not certify what was asked of it.
    Certification,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("point ({}, {}) lies on the discontinuity set", .0.x, .0.y)]
    OnDiscontinuity(Point),

    #[error("point ({}, {}) lies outside the domain", .0.x, .0.y)]
    OutsideDomain(Point),

    #[error("boundary hit at step {step}: ({}, {})", .point.x, .point.y)]
    BoundaryAtStep { step: usize, point: Point },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cell count {count} exceeds cap {cap}")]
    CellCap { count: usize, cap: usize },

    #[error("block table for alphabet {alphabet} and length {len} is too large")]
    BlockTableTooLarge { alphabet: usize, len: usize },

    #[error("no admissible window: {0}")]
    EmptyRegion(String),

    #[error("certificate unusable: delta = {delta:e} is below {threshold:e}")]
    DeltaBelowThreshold { delta: f64, threshold: f64 },

    #[error("{events} boundary perturbations in {iterates} iterates exceed the allowed fraction")]
    ExcessiveBoundaryEvents { events: u64, iterates: u64 },

    #[error("slab |x2 - {center}| <= {half_width} holds no mass")]
    EmptySlab { center: f64, half_width: f64 },

    #[error("undersampled: {0}")]
    Undersampled(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::CellCap { .. } | Error::BlockTableTooLarge { .. } => ErrorKind::Resource,
            Error::EmptyRegion(_)
            | Error::DeltaBelowThreshold { .. }
            | Error::ExcessiveBoundaryEvents { .. }
            | Error::Undersampled(_)
            | Error::DegenerateFit(_) => ErrorKind::Certification,
            _ => ErrorKind::Validation,
        }
    }
}
