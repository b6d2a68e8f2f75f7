//! Marching squares: closed contour polygons of a gridded field.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::density::DensityField;
use crate::geometry::Point;

/// A closed polyline, stored without repeating its first vertex.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ring {
    pub points: Vec<Point>,
}

impl Ring {
    /// Shoelace area, positive when counterclockwise.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| self.points[i].cross(self.points[(i + 1) % n]))
            .sum::<f64>()
            * 0.5
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n).map(|i| self.points[i].dist(self.points[(i + 1) % n])).sum()
    }

    /// Even-odd point in polygon test for this ring alone.
    pub fn contains(&self, p: Point) -> bool {
        let n = self.points.len();
        let mut inside = false;
        for i in 0..n {
            if crosses(self.points[i], self.points[(i + 1) % n], p) {
                inside = !inside;
            }
        }
        inside
    }

    /// Points along the ring with consecutive spacing at most `spacing`,
    /// every vertex included.
    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        let n = self.points.len();
        let mut out = Vec::new();
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            let k = ((a.dist(b) / spacing).ceil() as usize).max(1);
            for s in 0..k {
                out.push(a + (b - a) * (s as f64 / k as f64));
            }
        }
        out
    }
}

/// Whether the edge `a -> b` crosses the horizontal ray to the right of `p`.
#[inline]
fn crosses(a: Point, b: Point, p: Point) -> bool {
    if (a.y > p.y) != (b.y > p.y) {
        let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
        p.x < x
    } else {
        false
    }
}

/// Polygons with holes, given as oriented rings: outer rings counterclockwise,
/// holes clockwise. Membership is even-odd over all rings.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonSet {
    rings: Vec<Ring>,
    slab_lo: f64,
    slab_height: f64,
    slabs: Vec<Vec<(u32, u32)>>,
}

const SLABS: usize = 256;

impl PolygonSet {
    pub fn from_rings(rings: Vec<Ring>) -> Self {
        let rings: Vec<Ring> = rings.into_iter().filter(|r| r.points.len() >= 3).collect();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in rings.iter().flat_map(|r| r.points.iter()) {
            lo = lo.min(p.y);
            hi = hi.max(p.y);
        }
        let mut set = PolygonSet {
            rings,
            slab_lo: lo,
            slab_height: 0.0,
            slabs: Vec::new(),
        };
        if lo < hi {
            set.slab_height = (hi - lo) / SLABS as f64;
            set.slabs = alloc::vec![Vec::new(); SLABS];
            for (ri, ring) in set.rings.iter().enumerate() {
                let n = ring.points.len();
                for i in 0..n {
                    let (a, b) = (ring.points[i], ring.points[(i + 1) % n]);
                    let s0 = set.slab_of(a.y.min(b.y));
                    let s1 = set.slab_of(a.y.max(b.y));
                    for s in s0..=s1 {
                        set.slabs[s].push((ri as u32, i as u32));
                    }
                }
            }
        }
        set
    }

    fn slab_of(&self, y: f64) -> usize {
        (((y - self.slab_lo) / self.slab_height) as usize).min(SLABS - 1)
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        if self.slabs.is_empty() || p.y < self.slab_lo || p.y > self.slab_lo + self.slab_height * SLABS as f64 {
            return false;
        }
        let mut inside = false;
        for &(ri, i) in &self.slabs[self.slab_of(p.y)] {
            let ring = &self.rings[ri as usize].points;
            let a = ring[i as usize];
            let b = ring[(i as usize + 1) % ring.len()];
            if crosses(a, b, p) {
                inside = !inside;
            }
        }
        inside
    }

    /// Number of outer (positive area) rings.
    pub fn components(&self) -> usize {
        self.rings.iter().filter(|r| r.signed_area() > 0.0).count()
    }

    pub fn area(&self) -> f64 {
        self.rings.iter().map(Ring::signed_area).sum()
    }

    pub fn boundary_points(&self, spacing: f64) -> Vec<Point> {
        self.rings.iter().flat_map(|r| r.sample(spacing)).collect()
    }

    /// Outer rings, each with the holes that lie directly inside it.
    pub fn polygons(&self) -> Vec<(&Ring, Vec<&Ring>)> {
        let outers: Vec<usize> = (0..self.rings.len()).filter(|&i| self.rings[i].signed_area() > 0.0).collect();
        let mut holes: Vec<Vec<&Ring>> = alloc::vec![Vec::new(); outers.len()];
        for hole in self.rings.iter().filter(|r| r.signed_area() <= 0.0) {
            let probe = hole.points[0];
            let owner = outers
                .iter()
                .enumerate()
                .filter(|(_, &o)| self.rings[o].contains(probe))
                .min_by(|a, b| self.rings[*a.1].signed_area().total_cmp(&self.rings[*b.1].signed_area()));
            if let Some((k, _)) = owner {
                holes[k].push(hole);
            }
        }
        outers.iter().map(|&o| &self.rings[o]).zip(holes).collect()
    }
}

/// Edge identifier on the padded lattice: `(vertical, i, j)`.
type EdgeKey = (bool, usize, usize);

/// Contours of `{field >= level}` as closed rings with the region on their
/// left.
///
/// The field is surrounded by a virtual border of zeros so every contour
/// closes; for `level > 0` a region touching the grid edge is closed along it.
/// Saddle cells are resolved by the mean of the four corners.
pub fn marching_squares(field: &DensityField, level: f64) -> PolygonSet {
    let g = &field.grid;
    let (nx, ny) = (g.nx + 2, g.ny + 2);
    let value = |i: usize, j: usize| -> f64 {
        if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
            0.0
        } else {
            field.at(i - 1, j - 1)
        }
    };
    let pos = |i: usize, j: usize| -> Point {
        Point::new(
            g.x_min + (i as f64 - 1.0) * g.dx(),
            g.y_min + (j as f64 - 1.0) * g.dy(),
        )
    };
    let crossing = |a: (usize, usize), b: (usize, usize)| -> Point {
        let (va, vb) = (value(a.0, a.1), value(b.0, b.1));
        let t = ((level - va) / (vb - va)).clamp(0.0, 1.0);
        let (pa, pb) = (pos(a.0, a.1), pos(b.0, b.1));
        pa + (pb - pa) * t
    };

    let mut next: BTreeMap<EdgeKey, EdgeKey> = BTreeMap::new();
    let mut points: BTreeMap<EdgeKey, Point> = BTreeMap::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // corners and edges in counterclockwise order
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let inside = corners.map(|(a, b)| value(a, b) >= level);
            if inside.iter().all(|&x| x) || inside.iter().all(|&x| !x) {
                continue;
            }
            let edges: [EdgeKey; 4] = [(false, i, j), (true, i + 1, j), (false, i, j + 1), (true, i, j)];
            let mut exits = Vec::new();
            let mut entries = Vec::new();
            for k in 0..4 {
                let (a, b) = (k, (k + 1) % 4);
                if inside[a] != inside[b] {
                    points.entry(edges[k]).or_insert_with(|| crossing(corners[a], corners[b]));
                    if inside[a] {
                        exits.push(k);
                    } else {
                        entries.push(k);
                    }
                }
            }
            if exits.len() == 1 {
                next.insert(edges[exits[0]], edges[entries[0]]);
                continue;
            }
            let center = corners.iter().map(|&(a, b)| value(a, b)).sum::<f64>() * 0.25;
            for &e in &exits {
                let pick = if center >= level {
                    // the following entry counterclockwise
                    (1..4).map(|d| (e + d) % 4).find(|k| entries.contains(k))
                } else {
                    (1..4).map(|d| (e + 4 - d) % 4).find(|k| entries.contains(k))
                };
                if let Some(k) = pick {
                    next.insert(edges[e], edges[k]);
                }
            }
        }
    }

    let mut rings = Vec::new();
    while let Some((&start, _)) = next.iter().next() {
        let mut ring = Vec::new();
        let mut key = start;
        while let Some(to) = next.remove(&key) {
            ring.push(points[&key]);
            key = to;
            if key == start {
                break;
            }
        }
        rings.push(Ring { points: dedup_ring(ring) });
    }
    PolygonSet::from_rings(rings)
}

fn dedup_ring(mut ring: Vec<Point>) -> Vec<Point> {
    ring.dedup();
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    ring
}
