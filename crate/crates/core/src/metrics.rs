//! Set-estimation error criteria: Hausdorff distance between finite point sets
//! (used on boundary samples) and Monte Carlo distance in measure.

use alloc::vec::Vec;

use rand::Rng;

use crate::contour::PolygonSet;
use crate::geometry::{KdTree, Point, PointSet, RConvexHull};
use crate::hdr::Region;
use crate::seed;

/// Default spacing of boundary samples, in data units.
pub const DEFAULT_BOUNDARY_SPACING: f64 = 0.01;
/// Default Monte Carlo sample size for the distance in measure.
pub const DEFAULT_MC_SAMPLES: usize = 200_000;

const CHUNK: usize = 8192;

/// A set known through a membership predicate and a sample of its frontier.
pub trait RegionHandle {
    fn contains(&self, p: Point) -> bool;
    /// Points on the frontier at most `spacing` apart along it. Nonempty for a
    /// nonempty region.
    fn boundary_points(&self, spacing: f64) -> Vec<Point>;
}

impl RegionHandle for Region {
    fn contains(&self, p: Point) -> bool {
        Region::contains(self, p)
    }
    fn boundary_points(&self, spacing: f64) -> Vec<Point> {
        Region::boundary_points(self, spacing)
    }
}

impl RegionHandle for RConvexHull {
    fn contains(&self, p: Point) -> bool {
        RConvexHull::contains(self, p)
    }
    fn boundary_points(&self, spacing: f64) -> Vec<Point> {
        RConvexHull::boundary_points(self, spacing)
    }
}

impl RegionHandle for PolygonSet {
    fn contains(&self, p: Point) -> bool {
        PolygonSet::contains(self, p)
    }
    fn boundary_points(&self, spacing: f64) -> Vec<Point> {
        PolygonSet::boundary_points(self, spacing)
    }
}

impl<T: RegionHandle + ?Sized> RegionHandle for &T {
    fn contains(&self, p: Point) -> bool {
        (**self).contains(p)
    }
    fn boundary_points(&self, spacing: f64) -> Vec<Point> {
        (**self).boundary_points(spacing)
    }
}

/// A region given by a closure and a fixed boundary sample.
pub struct FnRegion<F> {
    membership: F,
    boundary: Vec<Point>,
}

impl<F: Fn(Point) -> bool> FnRegion<F> {
    pub fn new(membership: F, boundary: Vec<Point>) -> Self {
        FnRegion { membership, boundary }
    }
}

impl<F> core::fmt::Debug for FnRegion<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnRegion").field("boundary", &self.boundary.len()).finish()
    }
}

impl<F: Fn(Point) -> bool> RegionHandle for FnRegion<F> {
    fn contains(&self, p: Point) -> bool {
        (self.membership)(p)
    }
    /// The stored sample; `spacing` is ignored.
    fn boundary_points(&self, _spacing: f64) -> Vec<Point> {
        self.boundary.clone()
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Rect { x_min, x_max, y_min, y_max }
    }

    /// `[-half, half]^2`.
    pub const fn square(half: f64) -> Self {
        Rect::new(-half, half, -half, half)
    }

    /// Bounding box of `points` grown by `pad` on every side.
    pub fn around(points: &[Point], pad: f64) -> Option<Self> {
        let first = points.first()?;
        let mut r = Rect::new(first.x, first.x, first.y, first.y);
        for p in points {
            r.x_min = r.x_min.min(p.x);
            r.x_max = r.x_max.max(p.x);
            r.y_min = r.y_min.min(p.y);
            r.y_max = r.y_max.max(p.y);
        }
        Some(Rect::new(r.x_min - pad, r.x_max + pad, r.y_min - pad, r.y_max + pad))
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Exact Hausdorff distance between two finite point sets,
/// `max(sup_a d(a, C), sup_c d(c, A))`. `+inf` when exactly one side is empty,
/// zero when both are.
pub fn hausdorff(a: &PointSet, c: &PointSet) -> f64 {
    hausdorff_points(a.points(), c.points())
}

/// As [`hausdorff`], on slices.
pub fn hausdorff_points(a: &[Point], c: &[Point]) -> f64 {
    match (a.is_empty(), c.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    directed(a, c).max(directed(c, a))
}

/// `sup_{p in from} d(p, to)`.
fn directed(from: &[Point], to: &[Point]) -> f64 {
    let tree = KdTree::new(to);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        from.par_iter().map(|&p| tree.nearest(p).map_or(f64::INFINITY, |x| x.1)).reduce(|| 0.0, f64::max).sqrt()
    }
    #[cfg(not(feature = "parallel"))]
    {
        from.iter().map(|&p| tree.nearest(p).map_or(f64::INFINITY, |x| x.1)).fold(0.0, f64::max).sqrt()
    }
}

/// Hausdorff distance between the boundary samples of two regions.
pub fn boundary_hausdorff<A: RegionHandle + ?Sized, C: RegionHandle + ?Sized>(a: &A, c: &C, spacing: f64) -> f64 {
    hausdorff_points(&a.boundary_points(spacing), &c.boundary_points(spacing))
}

/// Monte Carlo estimate of the area of a symmetric difference.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureEstimate {
    pub value: f64,
    /// `area * sqrt(p (1 - p) / m)` with `p` the disagreement fraction.
    pub std_error: f64,
    pub disagreements: usize,
    pub samples: usize,
}

/// `area(bbox)` times the fraction of `m` uniform points of `bbox` on which
/// the two memberships disagree.
///
/// Points are drawn in chunks of fixed size, each from its own seed stream, so
/// the result does not depend on the thread count.
pub fn distance_in_measure<A, C>(a: &A, c: &C, bbox: Rect, m: usize, seed: u64) -> MeasureEstimate
where
    A: RegionHandle + Sync + ?Sized,
    C: RegionHandle + Sync + ?Sized,
{
    let chunks = m.div_ceil(CHUNK);
    let count_chunk = |k: usize| -> usize {
        let len = CHUNK.min(m - k * CHUNK);
        let mut rng = seed::rng(seed::derive(seed, k as u64));
        let mut bad = 0;
        for _ in 0..len {
            let p = Point::new(
                rng.gen_range(bbox.x_min..=bbox.x_max),
                rng.gen_range(bbox.y_min..=bbox.y_max),
            );
            if a.contains(p) != c.contains(p) {
                bad += 1;
            }
        }
        bad
    };
    #[cfg(feature = "parallel")]
    let disagreements: usize = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(count_chunk).sum()
    };
    #[cfg(not(feature = "parallel"))]
    let disagreements: usize = (0..chunks).map(count_chunk).sum();
    let area = bbox.area();
    if m == 0 {
        return MeasureEstimate {
            value: 0.0,
            std_error: 0.0,
            disagreements: 0,
            samples: 0,
        };
    }
    let frac = disagreements as f64 / m as f64;
    MeasureEstimate {
        value: area * frac,
        std_error: area * (frac * (1.0 - frac) / m as f64).sqrt(),
        disagreements,
        samples: m,
    }
}
