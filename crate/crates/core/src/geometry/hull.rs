//! r-convex hulls: the intersection of the complements of all open balls of
//! radius `r` that miss the point set.
//!
//! Membership uses the dual description of the hull. Let `E` be the set of
//! centers `c` with `d(c, A) >= r`; then `q` is outside `C_r(A)` exactly when
//! `d(q, E) < r`. The point of `E` nearest to `q` is either `q` itself, a
//! corner of `E` (a center at distance `r` from two points, which always
//! belong to a Delaunay edge), or the radial projection of `q` onto the circle
//! of radius `r` about one point of `A`. All three candidate families are
//! enumerated with k-d trees.

use alloc::sync::Arc as Shared;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use super::boundary::{wrap_positive, Arc, BoundaryLoop, BoundaryPiece, HullBoundary, Orientation, Segment};
use super::convex::{segment_distance, ConvexPolygon};
use super::delaunay::{Edge, Triangulation};
use super::kdtree::KdTree;
use super::point::{bounds, distinct};
use super::{GeometryError, Point, PointSet, EPS_GEOM};

const GRID_ANGLES: usize = 720;
const GRID_RADII: usize = 64;

/// How [`RConvexHull::contains`] decides membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MembershipMode {
    /// Exact candidate enumeration.
    #[default]
    Exact,
    /// Search over 720 directions x 64 distances of candidate ball centers.
    /// Only meant for cross-checking.
    Approximate,
}

/// An open ball of the hull radius that misses every point and has vertices
/// `a` and `b` on its boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmptyBall {
    pub center: Point,
    pub a: usize,
    pub b: usize,
}

/// The radius-independent part of a hull: distinct vertices, Delaunay
/// triangulation and search structures.
///
/// One skeleton serves hulls of any radius, so a radius search builds it once.
#[derive(Debug)]
pub struct HullSkeleton {
    source: PointSet,
    vertices: Vec<Point>,
    source_map: Vec<usize>,
    triangulation: Option<Triangulation>,
    edges: Vec<Edge>,
    tree: KdTree,
    convex: ConvexPolygon,
    scale: f64,
}

impl HullSkeleton {
    pub fn new(points: &PointSet) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyInput);
        }
        let (vertices, source_map) = distinct(points.points());
        let triangulation = match Triangulation::from_points(&vertices) {
            Ok(t) => Some(t),
            Err(GeometryError::DegenerateInput) => None,
            Err(e) => return Err(e),
        };
        let edges = match &triangulation {
            Some(t) => t.edges(),
            None => chain_edges(&vertices),
        };
        let (lo, hi) = bounds(&vertices).unwrap_or_default();
        Ok(HullSkeleton {
            source: points.clone(),
            tree: KdTree::new(&vertices),
            convex: ConvexPolygon::hull_of(&vertices),
            vertices,
            source_map,
            triangulation,
            edges,
            scale: (hi.x - lo.x).max(hi.y - lo.y).max(1.0),
        })
    }

    pub fn source(&self) -> &PointSet {
        &self.source
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangulation(&self) -> Option<&Triangulation> {
        self.triangulation.as_ref()
    }

    pub fn convex_hull(&self) -> &ConvexPolygon {
        &self.convex
    }

    /// The hull of radius `r` (`f64::INFINITY` for the convex hull).
    pub fn hull(self: &Shared<Self>, r: f64) -> Result<RConvexHull, GeometryError> {
        if r.is_nan() || r <= 0.0 {
            return Err(GeometryError::InvalidRadius(r));
        }
        let mut hull = RConvexHull {
            skeleton: Shared::clone(self),
            radius: r,
            mode: MembershipMode::Exact,
            balls: Vec::new(),
            ball_tree: KdTree::default(),
            exposed: Vec::new(),
            exposed_tree: KdTree::default(),
        };
        if r.is_infinite() {
            return Ok(hull);
        }
        let v = &self.vertices;
        let mut has_short_edge = alloc::vec![false; v.len()];
        let mut is_exposed = alloc::vec![false; v.len()];
        for &Edge { a, b, .. } in &self.edges {
            let (pa, pb) = (v[a], v[b]);
            let len = pa.dist(pb);
            if len > 2.0 * r {
                continue;
            }
            has_short_edge[a] = true;
            has_short_edge[b] = true;
            let h = (r * r - 0.25 * len * len).max(0.0).sqrt();
            let normal = (pb - pa).perp() * (1.0 / len);
            let mid = pa.midpoint(pb);
            for center in [mid + normal * h, mid - normal * h] {
                if self.tree.nearest_distance(center) >= r - EPS_GEOM {
                    hull.balls.push(EmptyBall { center, a, b });
                    is_exposed[a] = true;
                    is_exposed[b] = true;
                }
            }
        }
        hull.exposed = (0..v.len()).filter(|&i| is_exposed[i] || !has_short_edge[i]).collect();
        let centers: Vec<Point> = hull.balls.iter().map(|b| b.center).collect();
        hull.ball_tree = KdTree::new(&centers);
        let exposed_points: Vec<Point> = hull.exposed.iter().map(|&i| v[i]).collect();
        hull.exposed_tree = KdTree::new(&exposed_points);
        Ok(hull)
    }
}

/// Consecutive pairs of collinear points ordered along their line.
fn chain_edges(vertices: &[Point]) -> Vec<Edge> {
    if vertices.len() < 2 {
        return Vec::new();
    }
    let (lo, hi) = bounds(vertices).unwrap_or_default();
    let dir = if hi.x - lo.x >= hi.y - lo.y { Point::new(1.0, 0.0) } else { Point::new(0.0, 1.0) };
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&i, &j| vertices[i].dot(dir).total_cmp(&vertices[j].dot(dir)));
    order
        .windows(2)
        .map(|w| Edge {
            a: w[0],
            b: w[1],
            left: None,
            right: None,
        })
        .collect()
}

/// The r-convex hull `C_r(A)` of a point set.
///
/// Cloning is cheap: the radius-independent data is shared.
#[derive(Debug, Clone)]
pub struct RConvexHull {
    skeleton: Shared<HullSkeleton>,
    radius: f64,
    mode: MembershipMode,
    balls: Vec<EmptyBall>,
    ball_tree: KdTree,
    exposed: Vec<usize>,
    exposed_tree: KdTree,
}

/// Builds `C_r(points)`. `r` must be positive; `f64::INFINITY` gives the
/// convex hull.
pub fn r_convex_hull(points: &PointSet, r: f64) -> Result<RConvexHull, GeometryError> {
    if r.is_nan() || r <= 0.0 {
        return Err(GeometryError::InvalidRadius(r));
    }
    Shared::new(HullSkeleton::new(points)?).hull(r)
}

/// Connected components of a hull.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Label of every source point, in input order.
    pub labels: Vec<usize>,
}

/// Component count and labels; see [`RConvexHull::components`].
pub fn hull_components(hull: &RConvexHull) -> Components {
    hull.components()
}

/// Points along the hull boundary with arc-length spacing at most `spacing`.
///
/// A hull without boundary curves (isolated points only) yields
/// [`GeometryError::EmptyBoundary`] carrying those points.
pub fn boundary_sample(hull: &RConvexHull, spacing: f64) -> Result<PointSet, GeometryError> {
    if spacing.is_nan() || spacing <= 0.0 {
        return Err(GeometryError::InvalidSpacing(spacing));
    }
    let boundary = hull.boundary();
    if boundary.loops.is_empty() && hull_filaments(hull).is_empty() {
        return Err(GeometryError::EmptyBoundary {
            points: boundary.isolated.iter().map(|&(_, p)| p).collect(),
        });
    }
    PointSet::new(hull.boundary_points(spacing))
}

fn hull_filaments(hull: &RConvexHull) -> Vec<(usize, Segment)> {
    hull.filaments()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VertexRole {
    Region,
    Filament,
    Isolated,
}

struct Partition {
    count: usize,
    vertex_labels: Vec<usize>,
    loop_labels: Vec<usize>,
    roles: Vec<VertexRole>,
    filaments: Vec<(usize, usize)>,
}

/// A flattened loop with its bounding box, for even-odd containment.
struct Ring {
    points: Vec<Point>,
    lo: Point,
    hi: Point,
    area: f64,
}

impl Ring {
    fn new(points: Vec<Point>, area: f64) -> Self {
        let (lo, hi) = bounds(&points).unwrap_or_default();
        Ring { points, lo, hi, area }
    }

    fn contains(&self, q: Point) -> bool {
        if q.x < self.lo.x || q.x > self.hi.x || q.y < self.lo.y || q.y > self.hi.y {
            return false;
        }
        let mut inside = false;
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.y > q.y) != (b.y > q.y) && q.x < a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x) {
                inside = !inside;
            }
        }
        inside
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl RConvexHull {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn source(&self) -> &PointSet {
        &self.skeleton.source
    }

    pub fn skeleton(&self) -> &Shared<HullSkeleton> {
        &self.skeleton
    }

    pub fn mode(&self) -> MembershipMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: MembershipMode) -> Self {
        self.mode = mode;
        self
    }

    /// Empty balls of radius `r` through pairs of Delaunay neighbours.
    pub fn empty_balls(&self) -> &[EmptyBall] {
        &self.balls
    }

    pub fn is_convex(&self) -> bool {
        self.radius.is_infinite()
    }

    /// Closed-set membership: `true` when every open ball of radius `r` that
    /// contains `q` also contains a source point.
    pub fn contains(&self, q: Point) -> bool {
        if self.radius.is_infinite() {
            return self.skeleton.convex.contains(q);
        }
        match self.mode {
            MembershipMode::Exact => self.contains_exact(q),
            MembershipMode::Approximate => self.contains_grid(q),
        }
    }

    fn contains_exact(&self, q: Point) -> bool {
        let r = self.radius;
        let tree = &self.skeleton.tree;
        let d = tree.nearest_distance(q);
        if d <= EPS_GEOM {
            return true;
        }
        if d >= r - EPS_GEOM {
            return false;
        }
        let reach = r - EPS_GEOM;
        if self.ball_tree.any_within(q, reach, |_, c| q.dist(c) < reach) {
            return false;
        }
        let outside = self.exposed_tree.any_within(q, 2.0 * r, |_, a| {
            let da = q.dist(a);
            if da <= EPS_GEOM || da >= 2.0 * r - EPS_GEOM {
                return false;
            }
            let center = a + (q - a) * (r / da);
            tree.nearest_distance(center) >= r - EPS_GEOM
        });
        !outside
    }

    fn contains_grid(&self, q: Point) -> bool {
        let r = self.radius;
        let tree = &self.skeleton.tree;
        if tree.nearest_distance(q) >= r - EPS_GEOM {
            return false;
        }
        for k in 1..GRID_RADII {
            let rho = r * k as f64 / GRID_RADII as f64;
            for j in 0..GRID_ANGLES {
                let c = q.polar(rho, TAU * j as f64 / GRID_ANGLES as f64);
                if tree.nearest_distance(c) >= r - EPS_GEOM {
                    return false;
                }
            }
        }
        true
    }

    /// Exact test that the closed segment `pa pb` lies in the hull: no
    /// admissible ball center comes within `r` of it.
    ///
    /// The admissible center nearest to the segment is a corner of `E` or a
    /// critical point of the distance to the segment along the circle about
    /// an exposed point: the foot of the perpendicular from that point, or
    /// the circle point nearest to either end.
    fn segment_inside(&self, pa: Point, pb: Point) -> bool {
        let r = self.radius;
        let len = pa.dist(pb);
        if len <= EPS_GEOM {
            return self.contains_exact(pa);
        }
        if len > 2.0 * r {
            return false;
        }
        let tree = &self.skeleton.tree;
        let reach = r - EPS_GEOM;
        let mid = pa.midpoint(pb);
        if self.ball_tree.any_within(mid, 0.5 * len + r, |_, c| segment_distance(c, pa, pb) < reach) {
            return false;
        }
        let dir = (pb - pa) * (1.0 / len);
        let normal = dir.perp();
        let admissible = |c: Point| segment_distance(c, pa, pb) < reach && tree.nearest_distance(c) >= r - EPS_GEOM;
        !self.exposed_tree.any_within(mid, 0.5 * len + 2.0 * r, |_, a| {
            let t = (a - pa).dot(dir);
            if t > 0.0 && t < len && (admissible(a + normal * r) || admissible(a - normal * r)) {
                return true;
            }
            [pa, pb].into_iter().any(|e| {
                let de = e.dist(a);
                de > EPS_GEOM && admissible(a + (e - a) * (r / de))
            })
        })
    }

    /// Boundary loops with placeholder labels.
    fn raw_loops(&self) -> Vec<BoundaryLoop> {
        let mut pieces: Vec<(BoundaryPiece, usize)> = Vec::new();
        for i in 0..self.balls.len() {
            for arc in self.exposed_arcs(i) {
                pieces.push((BoundaryPiece::Arc(arc), 0));
            }
        }
        chain_loops(pieces, 1e-7 * self.skeleton.scale)
    }

    /// Splits a finite-radius hull into components.
    ///
    /// Regions with interior are bounded by the loops: a vertex on a loop
    /// belongs to it, any other vertex to the smallest outer loop enclosing
    /// it. Parts of zero thickness are Delaunay edges lying in the hull
    /// outside every region, and the remaining vertices are isolated.
    ///
    /// Loops are tested for containment through their chords. Every chord
    /// cuts off a lens inside an empty ball, which holds neither vertices nor
    /// other boundary curves, so the coarse rings classify hull points exactly.
    fn partition(&self, loops: &[BoundaryLoop]) -> Partition {
        let sk = &self.skeleton;
        let v = &sk.vertices;
        let n = v.len();
        let tol = 1e-7 * sk.scale;
        let mut uf = UnionFind::new(n + loops.len());
        let mut status = alloc::vec![VertexRole::Isolated; n];
        for (l, lp) in loops.iter().enumerate() {
            for piece in &lp.pieces {
                for end in [piece.start(), piece.end()] {
                    if let Some((i, d)) = sk.tree.nearest(end) {
                        if d <= tol {
                            uf.union(i, n + l);
                            status[i] = VertexRole::Region;
                        }
                    }
                }
            }
        }
        let rings: Vec<Ring> = loops.iter().map(|lp| Ring::new(lp.to_ring(0.25 * self.radius), lp.signed_area())).collect();
        let inside_region = |q: Point| rings.iter().filter(|r| r.contains(q)).count() % 2 == 1;
        for i in 0..n {
            if status[i] != VertexRole::Isolated {
                continue;
            }
            let enclosing = rings
                .iter()
                .enumerate()
                .filter(|(_, r)| r.area > 0.0 && r.contains(v[i]))
                .min_by(|a, b| a.1.area.total_cmp(&b.1.area));
            if let Some((l, _)) = enclosing {
                uf.union(i, n + l);
                status[i] = VertexRole::Region;
            }
        }
        let mut filaments = Vec::new();
        for &Edge { a, b, .. } in &sk.edges {
            let (pa, pb) = (v[a], v[b]);
            if pa.dist(pb) > 2.0 * self.radius || inside_region(pa.midpoint(pb)) {
                continue;
            }
            if self.segment_inside(pa, pb) {
                uf.union(a, b);
                for k in [a, b] {
                    if status[k] == VertexRole::Isolated {
                        status[k] = VertexRole::Filament;
                    }
                }
                filaments.push((a, b));
            }
        }
        let mut label_of_root = alloc::vec![usize::MAX; n + loops.len()];
        let mut count = 0;
        let mut vertex_labels = Vec::with_capacity(n);
        for i in 0..n {
            let root = uf.find(i);
            if label_of_root[root] == usize::MAX {
                label_of_root[root] = count;
                count += 1;
            }
            vertex_labels.push(label_of_root[root]);
        }
        let mut loop_labels: Vec<Option<usize>> = (0..loops.len())
            .map(|l| {
                let label = label_of_root[uf.find(n + l)];
                (label != usize::MAX).then_some(label)
            })
            .collect();
        // a loop touching no vertex takes the label of the region around it
        for l in 0..loops.len() {
            if loop_labels[l].is_some() {
                continue;
            }
            let probe = rings[l].points.first().copied().unwrap_or_default();
            loop_labels[l] = rings
                .iter()
                .enumerate()
                .filter(|&(k, r)| k != l && r.area > 0.0 && r.contains(probe))
                .min_by(|a, b| a.1.area.total_cmp(&b.1.area))
                .map(|(k, _)| label_of_root[uf.find(n + k)])
                .filter(|&x| x != usize::MAX);
        }
        Partition {
            count,
            vertex_labels,
            loop_labels: loop_labels.into_iter().map(|l| l.unwrap_or(0)).collect(),
            roles: status,
            filaments,
        }
    }

    /// Connected components. Source points share a label when they lie in
    /// the same connected part of the hull.
    pub fn components(&self) -> Components {
        let sk = &self.skeleton;
        let (count, vertex_labels) = if self.radius.is_infinite() {
            (1, alloc::vec![0; sk.vertices.len()])
        } else {
            let parts = self.partition(&self.raw_loops());
            (parts.count, parts.vertex_labels)
        };
        Components {
            count,
            labels: sk.source_map.iter().map(|&v| vertex_labels[v]).collect(),
        }
    }

    /// Segments of zero thickness, labelled by the vertex index of their start.
    fn filaments(&self) -> Vec<(usize, Segment)> {
        let sk = &self.skeleton;
        let v = &sk.vertices;
        if self.radius.is_infinite() {
            let c = sk.convex.vertices();
            return if c.len() == 2 { alloc::vec![(0, Segment::new(c[0], c[1]))] } else { Vec::new() };
        }
        self.partition(&self.raw_loops())
            .filaments
            .into_iter()
            .map(|(a, b)| (a, Segment::new(v[a], v[b])))
            .collect()
    }

    /// Boundary of the hull as closed loops (region on the left, so outer
    /// loops run counterclockwise and holes clockwise) plus isolated points.
    pub fn boundary(&self) -> HullBoundary {
        let sk = &self.skeleton;
        let v = &sk.vertices;
        if self.radius.is_infinite() {
            let c = sk.convex.vertices();
            return match c.len() {
                0 => HullBoundary::default(),
                1 => HullBoundary {
                    loops: Vec::new(),
                    isolated: alloc::vec![(0, c[0])],
                },
                2 => HullBoundary::default(),
                n => HullBoundary {
                    loops: alloc::vec![BoundaryLoop {
                        component: 0,
                        pieces: (0..n)
                            .map(|i| BoundaryPiece::Segment(Segment::new(c[i], c[(i + 1) % n])))
                            .collect(),
                    }],
                    isolated: Vec::new(),
                },
            };
        }
        let mut loops = self.raw_loops();
        let parts = self.partition(&loops);
        for (lp, &label) in loops.iter_mut().zip(&parts.loop_labels) {
            lp.component = label;
        }
        let isolated = (0..v.len())
            .filter(|&i| parts.roles[i] == VertexRole::Isolated)
            .map(|i| (parts.vertex_labels[i], v[i]))
            .collect();
        HullBoundary { loops, isolated }
    }

    /// Parts of the circle of ball `i` between its two vertices that are not
    /// inside any other empty ball, travelled clockwise about the center.
    fn exposed_arcs(&self, i: usize) -> Vec<Arc> {
        let r = self.radius;
        let v = &self.skeleton.vertices;
        let ball = self.balls[i];
        let c = ball.center;
        let ta = v[ball.a].angle_from(c);
        let tb = v[ball.b].angle_from(c);
        let cw = wrap_positive(ta - tb);
        let (start, sweep) = if cw <= PI + 1e-12 { (ta, cw) } else { (tb, TAU - cw) };
        if sweep * r <= EPS_GEOM {
            return Vec::new();
        }
        let mut removed: Vec<(f64, f64)> = Vec::new();
        self.ball_tree.for_each_within(c, 2.0 * r, |j, other| {
            let d = c.dist(other);
            if j == i || d <= EPS_GEOM || d >= 2.0 * r {
                return;
            }
            let half = (d / (2.0 * r)).acos();
            let base = wrap_positive(start - other.angle_from(c));
            for k in [-1.0, 0.0, 1.0] {
                let lo = (base - half + k * TAU).max(0.0);
                let hi = (base + half + k * TAU).min(sweep);
                if hi > lo {
                    removed.push((lo, hi));
                }
            }
        });
        removed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::new();
        let mut cursor = 0.0;
        let keep = |from: f64, to: f64, out: &mut Vec<Arc>| {
            if (to - from) * r > EPS_GEOM {
                let arc = Arc::from_sweep(c, r, start - from, to - from, Orientation::Clockwise);
                if self.contains_exact(arc.point_at(0.5)) {
                    out.push(arc);
                }
            }
        };
        for (lo, hi) in removed {
            if lo > cursor {
                keep(cursor, lo, &mut out);
            }
            cursor = cursor.max(hi);
        }
        if cursor < sweep {
            keep(cursor, sweep, &mut out);
        }
        out
    }

    /// Boundary sample: every boundary curve sampled at arc-length spacing
    /// `<= spacing`, zero-thickness segments, and isolated points.
    pub fn boundary_points(&self, spacing: f64) -> Vec<Point> {
        let mut out = self.boundary().sample(spacing);
        if self.radius.is_finite() || self.skeleton.convex.vertices().len() == 2 {
            for (_, s) in self.filaments() {
                out.extend(s.sample(spacing));
            }
        }
        out
    }

    /// Fraction of `points` inside the hull.
    pub fn coverage(&self, points: &[Point]) -> f64 {
        if points.is_empty() {
            return 0.0;
        }
        points.iter().filter(|&&p| self.contains(p)).count() as f64 / points.len() as f64
    }
}

/// Unit tangent of a piece at its start (`at_end = false`) or end.
fn tangent(piece: &BoundaryPiece, at_end: bool) -> Point {
    match piece {
        BoundaryPiece::Segment(s) => {
            let d = s.end - s.start;
            d * (1.0 / d.norm())
        }
        BoundaryPiece::Arc(a) => {
            let theta = if at_end { a.theta_end } else { a.theta_start };
            let radial = Point::new(theta.cos(), theta.sin());
            match a.orientation {
                Orientation::Counterclockwise => radial.perp(),
                Orientation::Clockwise => radial.perp() * -1.0,
            }
        }
    }
}

/// Chains pieces end-to-start into closed loops. At a vertex where several
/// pieces start, the one turning furthest right is taken, which keeps regions
/// that touch at a point in separate loops.
fn chain_loops(pieces: Vec<(BoundaryPiece, usize)>, tol: f64) -> Vec<BoundaryLoop> {
    let starts: Vec<Point> = pieces.iter().map(|(p, _)| p.start()).collect();
    let tree = KdTree::new(&starts);
    let mut used = alloc::vec![false; pieces.len()];
    let mut loops = Vec::new();
    for first in 0..pieces.len() {
        if used[first] {
            continue;
        }
        used[first] = true;
        let mut chain = alloc::vec![first];
        loop {
            let current = &pieces[*chain.last().unwrap_or(&first)].0;
            let end = current.end();
            let back = tangent(current, true) * -1.0;
            let mut best: Option<(usize, f64)> = None;
            tree.for_each_within(end, tol, |j, _| {
                if used[j] && j != first {
                    return;
                }
                let out = tangent(&pieces[j].0, false);
                // clockwise angle from the reversed incoming direction
                let mut turn = wrap_positive(back.cross(out).atan2(back.dot(out)) * -1.0);
                if turn <= 1e-12 {
                    turn += TAU;
                }
                if best.map_or(true, |(_, b)| turn < b) {
                    best = Some((j, turn));
                }
            });
            match best {
                Some((j, _)) if j != first => {
                    used[j] = true;
                    chain.push(j);
                }
                _ => break,
            }
        }
        loops.push(BoundaryLoop {
            component: pieces[first].1,
            pieces: chain.iter().map(|&i| pieces[i].0).collect(),
        });
    }
    loops
}
