//! Planar geometry: Delaunay triangulation, convex hulls and r-convex hulls.
//!
//! All predicates compare against the absolute tolerance [`EPS_GEOM`] and treat
//! regions as closed sets: a query that sits on a boundary (up to the
//! tolerance) is inside.

mod boundary;
mod convex;
mod delaunay;
mod hull;
mod kdtree;
mod point;

pub use boundary::{Arc, BoundaryLoop, BoundaryPiece, HullBoundary, Orientation, Segment};
pub use convex::{diameter, segment_distance, ConvexPolygon};
pub use delaunay::{circumcircle, delaunay, Edge, Triangulation};
pub use hull::{boundary_sample, hull_components, r_convex_hull, Components, EmptyBall, HullSkeleton, MembershipMode, RConvexHull};
pub use kdtree::KdTree;
pub use point::{orient, Point, PointSet};

pub(crate) use convex::diameter_of;

/// Absolute tolerance, in input units, for every geometric comparison.
pub const EPS_GEOM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("{ids} ids supplied for {points} points")]
    IdLength { points: usize, ids: usize },
    #[error("empty point set")]
    EmptyInput,
    #[error("fewer than three distinct points, or all points collinear")]
    DegenerateInput,
    #[error("hull radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("sampling spacing must be positive, got {0}")]
    InvalidSpacing(f64),
    #[error("hull has no boundary curves, only {} isolated point(s)", points.len())]
    EmptyBoundary { points: alloc::vec::Vec<Point> },
}
