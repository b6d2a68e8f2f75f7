//! Estimated regions: r-convex hulls or contour polygons.

use alloc::vec::Vec;

use crate::contour::PolygonSet;
use crate::geometry::{Point, PointSet, RConvexHull};

#[derive(Debug, Clone)]
pub enum Region {
    Hull(RConvexHull),
    Contour(PolygonSet),
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Hull(h) => h.contains(p),
            Region::Contour(c) => c.contains(p),
        }
    }

    pub fn components(&self) -> usize {
        match self {
            Region::Hull(h) => h.components().count,
            Region::Contour(c) => c.components(),
        }
    }

    /// Points on the region's frontier, at most `spacing` apart along it.
    pub fn boundary_points(&self, spacing: f64) -> Vec<Point> {
        match self {
            Region::Hull(h) => h.boundary_points(spacing),
            Region::Contour(c) => c.boundary_points(spacing),
        }
    }

    pub fn as_hull(&self) -> Option<&RConvexHull> {
        match self {
            Region::Hull(h) => Some(h),
            Region::Contour(_) => None,
        }
    }

    pub fn as_contour(&self) -> Option<&PolygonSet> {
        match self {
            Region::Contour(c) => Some(c),
            Region::Hull(_) => None,
        }
    }
}

/// Fraction of `points` inside `region`.
pub fn coverage(region: &Region, points: &PointSet) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points.iter().filter(|&&p| region.contains(p)).count() as f64 / points.len() as f64
}
