//! Boundary curves of r-convex hulls: circular arcs and straight segments.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use super::Point;

/// Direction of travel along an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
}

/// Circular arc from `theta_start` to `theta_end`, travelled in `orientation`.
///
/// Angles are radians, counterclockwise positive, normalized to `(-pi, pi]`.
/// The swept angle is always in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Arc {
    pub center: Point,
    pub radius: f64,
    pub theta_start: f64,
    pub theta_end: f64,
    pub orientation: Orientation,
}

/// Straight boundary segment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub start: Point,
    pub end: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum BoundaryPiece {
    Arc(Arc),
    Segment(Segment),
}

/// Closed boundary curve of one hull component, with the region on its left.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryLoop {
    pub component: usize,
    pub pieces: Vec<BoundaryPiece>,
}

/// Complete boundary of a hull.
///
/// `isolated` holds the points that belong to no boundary curve: hull
/// components made of a single point or of points joined only by segments of
/// zero thickness.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HullBoundary {
    pub loops: Vec<BoundaryLoop>,
    pub isolated: Vec<(usize, Point)>,
}

/// Normalizes an angle to `(-pi, pi]`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}

/// Normalizes an angle to `[0, 2pi)`.
pub(crate) fn wrap_positive(theta: f64) -> f64 {
    let t = theta % TAU;
    if t < 0.0 {
        t + TAU
    } else {
        t
    }
}

impl Arc {
    /// Arc of `radius` about `center` starting at angle `start` and sweeping
    /// `sweep >= 0` radians in direction `orientation`.
    pub fn from_sweep(center: Point, radius: f64, start: f64, sweep: f64, orientation: Orientation) -> Self {
        let end = match orientation {
            Orientation::Counterclockwise => start + sweep,
            Orientation::Clockwise => start - sweep,
        };
        Arc {
            center,
            radius,
            theta_start: wrap_angle(start),
            theta_end: wrap_angle(end),
            orientation,
        }
    }

    /// Swept angle in `[0, 2pi)`.
    pub fn sweep(&self) -> f64 {
        match self.orientation {
            Orientation::Counterclockwise => wrap_positive(self.theta_end - self.theta_start),
            Orientation::Clockwise => wrap_positive(self.theta_start - self.theta_end),
        }
    }

    pub fn length(&self) -> f64 {
        self.radius * self.sweep()
    }

    /// Angle reached after travelling `s` radians from the start.
    pub fn angle_at(&self, s: f64) -> f64 {
        match self.orientation {
            Orientation::Counterclockwise => self.theta_start + s,
            Orientation::Clockwise => self.theta_start - s,
        }
    }

    /// Point at fraction `t` in `[0, 1]` of the way along the arc.
    pub fn point_at(&self, t: f64) -> Point {
        self.center.polar(self.radius, self.angle_at(t * self.sweep()))
    }

    pub fn start(&self) -> Point {
        self.center.polar(self.radius, self.theta_start)
    }

    pub fn end(&self) -> Point {
        self.center.polar(self.radius, self.theta_end)
    }

    /// Points along the arc, both endpoints included, with consecutive
    /// points at most `spacing` apart in arc length.
    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        let k = ((self.length() / spacing).ceil() as usize).max(1);
        self.subdivide(k)
    }

    /// Polyline approximation whose chords deviate from the arc by at most
    /// `tolerance` (the sagitta of every chord is `<= tolerance`).
    pub fn flatten(&self, tolerance: f64) -> Vec<Point> {
        let sweep = self.sweep();
        let k = if tolerance >= self.radius {
            // any chord of a half-turn or less is within tolerance
            (sweep / PI).ceil() as usize
        } else {
            let max_step = 2.0 * (1.0 - tolerance / self.radius).acos();
            (sweep / max_step).ceil() as usize
        };
        self.subdivide(k.max(1))
    }

    fn subdivide(&self, k: usize) -> Vec<Point> {
        let sweep = self.sweep();
        let mut out = Vec::with_capacity(k + 1);
        out.push(self.start());
        for i in 1..k {
            out.push(self.center.polar(self.radius, self.angle_at(sweep * i as f64 / k as f64)));
        }
        out.push(self.end());
        out
    }
}

impl Segment {
    pub fn new(start: Point, end: Point) -> Self {
        Segment { start, end }
    }

    pub fn length(&self) -> f64 {
        self.start.dist(self.end)
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.start + (self.end - self.start) * t
    }

    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        let k = ((self.length() / spacing).ceil() as usize).max(1);
        let mut out = Vec::with_capacity(k + 1);
        out.push(self.start);
        for i in 1..k {
            out.push(self.point_at(i as f64 / k as f64));
        }
        out.push(self.end);
        out
    }
}

impl BoundaryPiece {
    pub fn start(&self) -> Point {
        match self {
            BoundaryPiece::Arc(a) => a.start(),
            BoundaryPiece::Segment(s) => s.start,
        }
    }

    pub fn end(&self) -> Point {
        match self {
            BoundaryPiece::Arc(a) => a.end(),
            BoundaryPiece::Segment(s) => s.end,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            BoundaryPiece::Arc(a) => a.length(),
            BoundaryPiece::Segment(s) => s.length(),
        }
    }

    pub fn point_at(&self, t: f64) -> Point {
        match self {
            BoundaryPiece::Arc(a) => a.point_at(t),
            BoundaryPiece::Segment(s) => s.point_at(t),
        }
    }

    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        match self {
            BoundaryPiece::Arc(a) => a.sample(spacing),
            BoundaryPiece::Segment(s) => s.sample(spacing),
        }
    }

    /// Polyline with both endpoints; segments are returned as-is.
    pub fn flatten(&self, tolerance: f64) -> Vec<Point> {
        match self {
            BoundaryPiece::Arc(a) => a.flatten(tolerance),
            BoundaryPiece::Segment(s) => alloc::vec![s.start, s.end],
        }
    }
}

impl BoundaryLoop {
    /// Closed polyline of the loop (first vertex repeated at the end).
    pub fn to_ring(&self, tolerance: f64) -> Vec<Point> {
        let mut ring: Vec<Point> = Vec::new();
        for piece in &self.pieces {
            let pts = piece.flatten(tolerance);
            let skip = usize::from(!ring.is_empty());
            ring.extend_from_slice(&pts[skip..]);
        }
        if let Some(&first) = ring.first() {
            if let Some(last) = ring.last_mut() {
                *last = first;
            }
        }
        ring
    }

    /// Signed area enclosed by the loop, positive when counterclockwise.
    ///
    /// Arcs contribute their exact circular-segment area.
    pub fn signed_area(&self) -> f64 {
        let mut area = 0.0;
        for piece in &self.pieces {
            match piece {
                BoundaryPiece::Segment(s) => area += 0.5 * s.start.cross(s.end),
                BoundaryPiece::Arc(a) => {
                    let (p, q) = (a.start(), a.end());
                    area += 0.5 * p.cross(q);
                    let phi = a.sweep();
                    let bulge = 0.5 * a.radius * a.radius * (phi - phi.sin());
                    area += match a.orientation {
                        Orientation::Counterclockwise => bulge,
                        Orientation::Clockwise => -bulge,
                    };
                }
            }
        }
        area
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(BoundaryPiece::length).sum()
    }
}

impl HullBoundary {
    pub fn pieces(&self) -> impl Iterator<Item = &BoundaryPiece> + '_ {
        self.loops.iter().flat_map(|l| l.pieces.iter())
    }

    /// Points along every boundary curve at arc-length spacing `<= spacing`,
    /// plus the isolated points.
    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        let mut out = Vec::new();
        for piece in self.pieces() {
            out.extend(piece.sample(spacing));
        }
        out.extend(self.isolated.iter().map(|&(_, p)| p));
        out
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty() && self.isolated.is_empty()
    }
}
