//! Convex hulls and the sample diameter.

use alloc::vec::Vec;

use super::point::{distinct, orient};
use super::{Point, PointSet, EPS_GEOM};

/// Convex hull polygon, counterclockwise, without repeated or collinear
/// vertices. One vertex for a single point, two for a segment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Andrew's monotone chain.
    pub fn hull_of(points: &[Point]) -> Self {
        let (mut pts, _) = distinct(points);
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        if pts.len() <= 2 {
            return ConvexPolygon { vertices: pts };
        }
        let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
        for &p in &pts {
            while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        ConvexPolygon { vertices: lower }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Closed-set membership with tolerance [`EPS_GEOM`].
    pub fn contains(&self, q: Point) -> bool {
        let v = &self.vertices;
        match v.len() {
            0 => false,
            1 => v[0].dist(q) <= EPS_GEOM,
            2 => segment_distance(q, v[0], v[1]) <= EPS_GEOM,
            n => (0..n).all(|i| {
                let a = v[i];
                let b = v[(i + 1) % n];
                let len = a.dist(b);
                // signed distance of q to the supporting line, positive inside
                orient(a, b, q) / len >= -EPS_GEOM
            }),
        }
    }

    /// Boundary edges in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        let count = if n >= 3 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        if v.len() < 3 {
            return 0.0;
        }
        0.5 * (0..v.len()).map(|i| v[i].cross(v[(i + 1) % v.len()])).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }
}

/// Distance from `q` to the closed segment `ab`.
pub fn segment_distance(q: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return q.dist(a);
    }
    let t = ((q - a).dot(ab) / len2).clamp(0.0, 1.0);
    q.dist(a + ab * t)
}

/// Largest pairwise distance in the sample (0 for a single point).
///
/// The maximum is attained between convex hull vertices, so only those are
/// compared.
pub fn diameter(points: &PointSet) -> f64 {
    diameter_of(points.points())
}

pub(crate) fn diameter_of(points: &[Point]) -> f64 {
    let hull = ConvexPolygon::hull_of(points);
    let v = hull.vertices();
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max(v[i].dist2(v[j]));
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&PointSet::from_xy(&[(2.0, 3.0)]).unwrap()), 0.0);
        assert_eq!(diameter(&PointSet::from_xy(&[(0.0, 0.0), (3.0, 4.0)]).unwrap()), 5.0);
    }

    #[test]
    fn diameter_matches_brute_force() {
        let mut rng = crate::seed::rng(5);
        for _ in 0..10 {
            let pts: Vec<Point> = (0..50)
                .map(|_| Point::new(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let brute = pts
                .iter()
                .flat_map(|a| pts.iter().map(move |b| a.dist(*b)))
                .fold(0.0f64, f64::max);
            assert_eq!(diameter_of(&pts), brute);
        }
    }

    #[test]
    fn square_hull_and_membership() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 0.5),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let hull = ConvexPolygon::hull_of(&sq);
        assert_eq!(hull.vertices().len(), 4);
        assert!((hull.area() - 1.0).abs() < 1e-15);
        assert!(hull.contains(Point::new(0.5, 0.5)));
        assert!(hull.contains(Point::new(1.0, 0.5)));
        assert!(!hull.contains(Point::new(1.0 + 1e-6, 0.5)));
    }

    #[test]
    fn degenerate_hulls() {
        let seg = ConvexPolygon::hull_of(&[Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, 0.0)]);
        assert_eq!(seg.vertices().len(), 2);
        assert!(seg.contains(Point::new(1.5, 0.0)));
        assert!(!seg.contains(Point::new(1.5, 0.1)));
    }
}
