//! Delaunay triangulation of the distinct points of a sample.

use alloc::vec::Vec;

use super::point::{distinct, orient};
use super::{GeometryError, Point, PointSet};

/// Delaunay triangulation with per-triangle circumcircles and adjacency.
///
/// Vertices are the distinct input points; `vertex_of` maps an index of the
/// original sample to its vertex. Triangles are counterclockwise and
/// `neighbors[t][k]` is the triangle across the edge from vertex `k` to
/// vertex `k + 1` of triangle `t`.
#[derive(Debug, Clone)]
pub struct Triangulation {
    vertices: Vec<Point>,
    source_map: Vec<usize>,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<[Option<usize>; 3]>,
    circumcenters: Vec<Point>,
    circumradii: Vec<f64>,
}

/// An undirected triangulation edge with the triangles on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Triangle to the left of `a -> b`.
    pub left: Option<usize>,
    /// Triangle to the right of `a -> b`.
    pub right: Option<usize>,
}

/// Triangulates the distinct points of `points`.
///
/// Fails with [`GeometryError::DegenerateInput`] when there are fewer than
/// three distinct points or all of them are collinear.
pub fn delaunay(points: &PointSet) -> Result<Triangulation, GeometryError> {
    Triangulation::from_points(points.points())
}

impl Triangulation {
    pub fn from_points(points: &[Point]) -> Result<Self, GeometryError> {
        let (vertices, source_map) = distinct(points);
        if vertices.len() < 3 {
            return Err(GeometryError::DegenerateInput);
        }
        let input: Vec<delaunator::Point> = vertices
            .iter()
            .map(|p| delaunator::Point { x: p.x, y: p.y })
            .collect();
        let raw = delaunator::triangulate(&input);
        if raw.triangles.is_empty() {
            return Err(GeometryError::DegenerateInput);
        }
        let nt = raw.triangles.len() / 3;
        let mut triangles = Vec::with_capacity(nt);
        let mut neighbors = Vec::with_capacity(nt);
        let mut circumcenters = Vec::with_capacity(nt);
        let mut circumradii = Vec::with_capacity(nt);
        let across = |e: usize| {
            let h = raw.halfedges[e];
            (h != delaunator::EMPTY).then_some(h / 3)
        };
        for t in 0..nt {
            let v = [raw.triangles[3 * t], raw.triangles[3 * t + 1], raw.triangles[3 * t + 2]];
            let n = [across(3 * t), across(3 * t + 1), across(3 * t + 2)];
            let (v, n) = if orient(vertices[v[0]], vertices[v[1]], vertices[v[2]]) < 0.0 {
                ([v[0], v[2], v[1]], [n[2], n[1], n[0]])
            } else {
                (v, n)
            };
            let (c, r) = circumcircle(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
            triangles.push(v);
            neighbors.push(n);
            circumcenters.push(c);
            circumradii.push(r);
        }
        Ok(Triangulation {
            vertices,
            source_map,
            triangles,
            neighbors,
            circumcenters,
            circumradii,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex_of(&self, source_index: usize) -> usize {
        self.source_map[source_index]
    }

    pub fn source_map(&self) -> &[usize] {
        &self.source_map
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn neighbors(&self) -> &[[Option<usize>; 3]] {
        &self.neighbors
    }

    pub fn circumcenter(&self, t: usize) -> Point {
        self.circumcenters[t]
    }

    pub fn circumradius(&self, t: usize) -> f64 {
        self.circumradii[t]
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Every undirected edge exactly once.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.triangles.len() * 3 / 2 + 3);
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                match self.neighbors[t][k] {
                    // shared edges are emitted by the lower-numbered triangle
                    Some(u) if u < t => {}
                    other => out.push(Edge {
                        a,
                        b,
                        left: Some(t),
                        right: other,
                    }),
                }
            }
        }
        out
    }
}

/// Circumcenter and circumradius of a triangle (infinite radius when the
/// points are collinear).
pub fn circumcircle(a: Point, b: Point, c: Point) -> (Point, f64) {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    if d == 0.0 {
        return (a.midpoint(c), f64::INFINITY);
    }
    let ab2 = ab.dot(ab);
    let ac2 = ac.dot(ac);
    let ux = (ac.y * ab2 - ab.y * ac2) / d;
    let uy = (ab.x * ac2 - ac.x * ab2) / d;
    let center = Point::new(a.x + ux, a.y + uy);
    (center, (ux * ux + uy * uy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn unit_square_gives_two_triangles_sharing_a_diagonal() {
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let tri = delaunay(&ps).unwrap();
        assert_eq!(tri.len(), 2);
        let edges = tri.edges();
        assert_eq!(edges.len(), 5);
        let shared: Vec<_> = edges.iter().filter(|e| e.right.is_some()).collect();
        assert_eq!(shared.len(), 1);
        let (a, b) = (tri.vertices()[shared[0].a], tri.vertices()[shared[0].b]);
        assert!((a.dist(b) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn three_points_one_triangle() {
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
        let tri = delaunay(&ps).unwrap();
        assert_eq!(tri.len(), 1);
        assert!((tri.circumradius(0) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(tri.circumcenter(0), Point::new(0.5, 0.5));
    }

    #[test]
    fn degenerate_inputs() {
        let two = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(delaunay(&two).unwrap_err(), GeometryError::DegenerateInput);
        let line = PointSet::from_xy(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).unwrap();
        assert_eq!(delaunay(&line).unwrap_err(), GeometryError::DegenerateInput);
    }

    #[test]
    fn empty_circumcircle_property_on_random_points() {
        let mut rng = crate::seed::rng(20);
        for trial in 0..20 {
            let n = if trial == 0 { 20 } else { rng.gen_range(5..60) };
            let pts: Vec<Point> = (0..n)
                .map(|_| Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
                .collect();
            let tri = Triangulation::from_points(&pts).unwrap();
            for t in 0..tri.len() {
                let c = tri.circumcenter(t);
                let r = tri.circumradius(t);
                for p in &pts {
                    assert!(p.dist(c) >= r - 1e-9 * (1.0 + r), "vertex inside circumcircle");
                }
                let [a, b, d] = tri.triangles()[t];
                assert!(orient(tri.vertices()[a], tri.vertices()[b], tri.vertices()[d]) > 0.0);
            }
            // adjacency symmetry
            for (t, ns) in tri.neighbors().iter().enumerate() {
                for u in ns.iter().flatten() {
                    assert!(tri.neighbors()[*u].contains(&Some(t)));
                }
            }
        }
    }
}
