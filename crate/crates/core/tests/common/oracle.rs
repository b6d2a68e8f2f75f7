//! Brute-force membership oracle for r-convex hulls.
//!
//! A query `q` is outside `C_r(A)` when some center `c` with `|c - q| < r`
//! has `d(c, A) >= r`. The oracle maximizes `d(., A)` over the disk of radius
//! `r` about `q` by branch and bound over square cells of candidate centers.

use std::collections::BinaryHeap;

use hdrest_core::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Inside,
    Outside,
    /// The largest empty-ball radius reachable from `q` is within the band of `r`.
    Boundary,
}

struct Cell {
    ub: f64,
    center: Point,
    half: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.ub == other.ub
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.ub.total_cmp(&other.ub)
    }
}

fn nearest(points: &[Point], c: Point) -> f64 {
    points.iter().map(|p| p.dist2(c)).fold(f64::INFINITY, f64::min).sqrt()
}

/// Upper bound of `d(., A)` over a square cell: the nearest farthest corner.
fn upper(points: &[Point], center: Point, half: f64) -> f64 {
    points
        .iter()
        .map(|p| {
            let dx = (p.x - center.x).abs() + half;
            let dy = (p.y - center.y).abs() + half;
            dx * dx + dy * dy
        })
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Decides membership of `q` in `C_r(points)` up to a band of width `band` on
/// the value of the largest empty-ball radius.
pub fn classify(points: &[Point], r: f64, q: Point, band: f64) -> Verdict {
    let d0 = nearest(points, q);
    if d0 >= r + band {
        return Verdict::Outside;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Cell {
        ub: upper(points, q, r),
        center: q,
        half: r,
    });
    let mut best = d0;
    while let Some(cell) = heap.pop() {
        if cell.ub < r - band {
            return if best >= r + band { Verdict::Outside } else { Verdict::Inside };
        }
        if best >= r + band {
            return Verdict::Outside;
        }
        if cell.half < band / 8.0 {
            return Verdict::Boundary;
        }
        let h = 0.5 * cell.half;
        for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            let center = Point::new(cell.center.x + sx * h, cell.center.y + sy * h);
            // closest point of the cell to q: inside the disk iff the cell meets it
            let cx = q.x.clamp(center.x - h, center.x + h);
            let cy = q.y.clamp(center.y - h, center.y + h);
            let closest = Point::new(cx, cy);
            if closest.dist(q) >= r {
                continue;
            }
            best = best.max(nearest(points, closest));
            if center.dist(q) < r {
                best = best.max(nearest(points, center));
            }
            let ub = upper(points, center, h);
            if ub >= r - band && ub > best {
                heap.push(Cell { ub, center, half: h });
            }
        }
    }
    if best >= r + band {
        Verdict::Outside
    } else if best > r - band {
        Verdict::Boundary
    } else {
        Verdict::Inside
    }
}
