//! Static 2-d tree for nearest-neighbour and fixed-radius queries.

use alloc::vec::Vec;

use super::Point;

#[derive(Debug, Clone, Copy)]
struct Entry {
    p: Point,
    idx: usize,
}

/// Balanced 2-d tree built once over a point slice.
///
/// The tree is stored implicitly: the median of every sub-slice is its node,
/// and `axes` records the splitting axis chosen for that node.
#[derive(Debug, Clone, Default)]
pub struct KdTree {
    entries: Vec<Entry>,
    axes: Vec<u8>,
}

#[inline]
fn coord(p: Point, axis: u8) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

impl KdTree {
    pub fn new(points: &[Point]) -> Self {
        let mut entries: Vec<Entry> = points
            .iter()
            .enumerate()
            .map(|(idx, &p)| Entry { p, idx })
            .collect();
        let mut axes = alloc::vec![0u8; entries.len()];
        build(&mut entries, &mut axes);
        KdTree { entries, axes }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index and squared distance of the point nearest to `q`.
    pub fn nearest(&self, q: Point) -> Option<(usize, f64)> {
        if self.entries.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_in(0, self.entries.len(), q, &mut best);
        Some(best)
    }

    /// Distance from `q` to the nearest point (`+inf` for an empty tree).
    pub fn nearest_distance(&self, q: Point) -> f64 {
        self.nearest(q).map_or(f64::INFINITY, |(_, d2)| d2.sqrt())
    }

    fn nearest_in(&self, lo: usize, hi: usize, q: Point, best: &mut (usize, f64)) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let e = self.entries[mid];
        let d2 = e.p.dist2(q);
        if d2 < best.1 || (d2 == best.1 && e.idx < best.0) {
            *best = (e.idx, d2);
        }
        let axis = self.axes[mid];
        let delta = coord(q, axis) - coord(e.p, axis);
        let (near, far) = if delta < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.nearest_in(near.0, near.1, q, best);
        if delta * delta <= best.1 {
            self.nearest_in(far.0, far.1, q, best);
        }
    }

    /// Calls `visit(index, point)` for every point with `|p - q| <= radius`.
    pub fn for_each_within<F: FnMut(usize, Point)>(&self, q: Point, radius: f64, mut visit: F) {
        let r2 = radius * radius;
        self.within_in(0, self.entries.len(), q, radius, r2, &mut |i, p| {
            visit(i, p);
            false
        });
    }

    /// Whether `pred(index, point)` holds for some point with `|p - q| <= radius`.
    /// Stops at the first hit.
    pub fn any_within<F: FnMut(usize, Point) -> bool>(&self, q: Point, radius: f64, mut pred: F) -> bool {
        let r2 = radius * radius;
        self.within_in(0, self.entries.len(), q, radius, r2, &mut pred)
    }

    fn within_in<F: FnMut(usize, Point) -> bool>(
        &self,
        lo: usize,
        hi: usize,
        q: Point,
        radius: f64,
        r2: f64,
        visit: &mut F,
    ) -> bool {
        if lo >= hi {
            return false;
        }
        let mid = (lo + hi) / 2;
        let e = self.entries[mid];
        if e.p.dist2(q) <= r2 && visit(e.idx, e.p) {
            return true;
        }
        let axis = self.axes[mid];
        let delta = coord(q, axis) - coord(e.p, axis);
        if delta - radius <= 0.0 && self.within_in(lo, mid, q, radius, r2, visit) {
            return true;
        }
        delta + radius >= 0.0 && self.within_in(mid + 1, hi, q, radius, r2, visit)
    }
}

fn build(entries: &mut [Entry], axes: &mut [u8]) {
    if entries.len() <= 1 {
        return;
    }
    let (mut lo, mut hi) = (entries[0].p, entries[0].p);
    for e in entries.iter() {
        lo.x = lo.x.min(e.p.x);
        lo.y = lo.y.min(e.p.y);
        hi.x = hi.x.max(e.p.x);
        hi.y = hi.y.max(e.p.y);
    }
    let axis = u8::from(hi.y - lo.y > hi.x - lo.x);
    let mid = entries.len() / 2;
    entries.select_nth_unstable_by(mid, |a, b| coord(a.p, axis).total_cmp(&coord(b.p, axis)));
    axes[mid] = axis;
    let (left, rest) = entries.split_at_mut(mid);
    let (left_axes, rest_axes) = axes.split_at_mut(mid);
    build(left, left_axes);
    build(&mut rest[1..], &mut rest_axes[1..]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = crate::seed::rng(seed);
        (0..n)
            .map(|_| Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn nearest_matches_linear_scan() {
        let pts = random_points(300, 1);
        let tree = KdTree::new(&pts);
        for q in random_points(200, 2) {
            let (i, d2) = tree.nearest(q).unwrap();
            let best = pts.iter().map(|p| p.dist2(q)).fold(f64::INFINITY, f64::min);
            assert_eq!(d2, best);
            assert_eq!(pts[i].dist2(q), best);
        }
    }

    #[test]
    fn within_matches_linear_scan() {
        let pts = random_points(300, 3);
        let tree = KdTree::new(&pts);
        for q in random_points(50, 4) {
            let mut got = Vec::new();
            tree.for_each_within(q, 0.3, |i, _| got.push(i));
            got.sort_unstable();
            let want: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].dist(q) <= 0.3).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn empty_tree() {
        let tree = KdTree::new(&[]);
        assert!(tree.nearest(Point::new(0.0, 0.0)).is_none());
        assert_eq!(tree.nearest_distance(Point::default()), f64::INFINITY);
    }
}
