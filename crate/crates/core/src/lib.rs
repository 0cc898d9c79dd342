//! Desk-scale computational geometry on finite truncations of Gromov
//! hyperbolic spaces.
//!
//! The toolkit works with finite weighted graphs standing in for proper
//! geodesic spaces: exact shortest-path metrics, four-point hyperbolicity
//! constants, Busemann fields anchored at escaping vertex sequences,
//! conformal deformations `d_eps` driven by densities `exp(-eps * b)`,
//! rough isometries with certified constants, and empirical uniformity
//! estimates for the deformed spaces.

#![forbid(unsafe_code)]

pub mod busemann;
pub mod hyperbolicity;
pub mod io;
pub mod models;
pub mod roughiso;
pub mod space;
pub mod uniformity;
pub mod uniformize;

pub use space::{Curve, MetricSpace, VertexId};

use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: no path between '{u}' and '{v}'")]
    Disconnected { u: String, v: String },

    #[error("edge '{u}'-'{v}' has non-positive length {len}")]
    NonPositiveEdge { u: String, v: String, len: f64 },

    #[error("self-loop on vertex '{v}' is not allowed")]
    SelfLoop { v: String },

    #[error("duplicate vertex id '{id}'")]
    DuplicateVertex { id: String },

    #[error("unknown vertex '{name}'")]
    UnknownVertex { name: String },

    #[error("vertices {u:?} and {v:?} are not adjacent")]
    NotAdjacent { u: String, v: String },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error(
        "exact four-point scan over {n} vertices exceeds the cap {cap}; \
         use sampled mode (a certified lower bound) instead"
    )]
    ExactCapExceeded { n: usize, cap: usize },

    #[error("sampled mode requires count >= 1")]
    EmptySample,

    #[error("anchor '{name}' needs at least 2 vertices, got {len}")]
    AnchorTooShort { name: String, len: usize },

    #[error("anchor '{name}' failed verification: {reason}")]
    AnchorRejected { name: String, reason: String },

    #[error("unknown anchor '{name}'")]
    UnknownAnchor { name: String },

    #[error("fields disagree on {what}")]
    FieldMismatch { what: String },

    #[error("frontier is empty: boundary distance is undefined on a truncation without a marked escape set")]
    EmptyFrontier,

    #[error("deformed distance between '{u}' and '{v}' collapsed below resolution; pair skipped from ratios")]
    CollapsedPair { u: String, v: String },

    #[error("invalid parameter {name}: {reason}")]
    BadParameter { name: String, reason: String },

    #[error("point ({x}, {y}) lies outside the grid; need x in [{x_lo}, {x_hi}], y in [{y_lo}, {y_hi}]")]
    OutsideGrid {
        x: f64,
        y: f64,
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
    },

    #[error("map is not total: source vertex '{name}' has no image")]
    PartialMap { name: String },

    #[error("need at least {needed} anchors, got {got}")]
    TooFewAnchors { needed: usize, got: usize },

    #[error("curve must have positive length")]
    ZeroLengthCurve,

    #[error("curves do not share an endpoint: cannot concatenate")]
    DisjointCurves,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
