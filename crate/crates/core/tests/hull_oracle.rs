#[path = "common/oracle.rs"]
mod oracle;

use oracle::{classify, Verdict};
use hdrest_core::geometry::{r_convex_hull, RConvexHull};
use hdrest_core::{seed, Point, PointSet};
use rand::Rng;

#[test]
fn exact_membership_matches_empty_ball_search() {
    let mut rng = seed::rng(20);
    let mut boundary = 0usize;
    for set in 0..12 {
        let n = rng.gen_range(3..=25);
        let pts: Vec<Point> = (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
        let r = rng.gen_range(0.08..0.6);
        let hull = r_convex_hull(&PointSet::new(pts.clone()).unwrap(), r).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                let q = Point::new(-0.1 + 1.2 * i as f64 / 59.0, -0.1 + 1.2 * j as f64 / 59.0);
                match classify(&pts, r, q, 1e-6) {
                    Verdict::Boundary => boundary += 1,
                    v => assert_eq!(hull.contains(q), v == Verdict::Inside, "set {set} r {r} q {q:?}"),
                }
            }
        }
    }
    assert!(boundary < 100, "{boundary} boundary queries");
}

fn flood_labels(inside: &[bool], side: usize) -> Vec<usize> {
    let mut label = vec![usize::MAX; inside.len()];
    let mut next = 0;
    for start in 0..inside.len() {
        if !inside[start] || label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = next;
        while let Some(k) = stack.pop() {
            let (i, j) = (k / side, k % side);
            let mut visit = |ii: usize, jj: usize| {
                let kk = ii * side + jj;
                if inside[kk] && label[kk] == usize::MAX {
                    label[kk] = next;
                    stack.push(kk);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < side {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < side {
                visit(i, j + 1);
            }
        }
        next += 1;
    }
    label
}

/// Grid component of every source point whose neighbourhood of 5 x 5 grid
/// nodes lies inside the hull.
fn grid_components(hull: &RConvexHull, pts: &[Point], side: usize) -> Vec<Option<usize>> {
    let step = 1.2 / (side - 1) as f64;
    let node = |k: usize| Point::new(-0.1 + step * (k / side) as f64, -0.1 + step * (k % side) as f64);
    let inside: Vec<bool> = (0..side * side).map(|k| hull.contains(node(k))).collect();
    let grid = flood_labels(&inside, side);
    pts.iter()
        .map(|p| {
            let i = ((p.x + 0.1) / step).round() as usize;
            let j = ((p.y + 0.1) / step).round() as usize;
            let near: Vec<usize> = (i.saturating_sub(2)..=(i + 2).min(side - 1))
                .flat_map(|a| (j.saturating_sub(2)..=(j + 2).min(side - 1)).map(move |b| a * side + b))
                .collect();
            near.iter().all(|&k| inside[k]).then(|| grid[near[0]])
        })
        .collect()
}

#[test]
fn components_match_grid_flood_fill() {
    let mut rng = seed::rng(21);
    let mut compared = 0;
    for set in 0..30 {
        let clusters = rng.gen_range(1..=3);
        let centers: Vec<Point> = (0..clusters).map(|_| Point::new(rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8))).collect();
        let pts: Vec<Point> = (0..rng.gen_range(6..=30))
            .map(|i| {
                let c = centers[i % clusters];
                Point::new(c.x + rng.gen_range(-0.15..0.15), c.y + rng.gen_range(-0.15..0.15))
            })
            .collect();
        let r = rng.gen_range(0.05..0.5);
        let hull = r_convex_hull(&PointSet::new(pts.clone()).unwrap(), r).unwrap();
        let comps = hull.components();
        let coarse = grid_components(&hull, &pts, 240);
        let fine = grid_components(&hull, &pts, 479);
        for a in 0..pts.len() {
            for b in 0..a {
                let (Some(ca), Some(cb), Some(fa), Some(fb)) = (coarse[a], coarse[b], fine[a], fine[b]) else {
                    continue;
                };
                // a neck thinner than the grid can split grid regions, never join them
                if ca == cb || fa == fb {
                    assert_eq!(comps.labels[a], comps.labels[b], "set {set} r {r}: points {a} {b} joined on the grid");
                } else {
                    assert_ne!(comps.labels[a], comps.labels[b], "set {set} r {r}: points {a} {b} split on both grids");
                }
                compared += 1;
            }
        }
    }
    assert!(compared > 1000, "{compared}");
}

#[test]
fn sliver_tip_is_cut_off() {
    let pts = PointSet::from_xy(&[(0.0, 1.0), (0.0, -1.0), (5.0, 0.0)]).unwrap();
    for r in [3.0, 10.0] {
        let hull = r_convex_hull(&pts, r).unwrap();
        assert!(!hull.contains(Point::new(4.2, 0.0)), "r {r}");
        let c = hull.components();
        assert_eq!(c.count, 2, "r {r}");
        assert_eq!(c.labels[0], c.labels[1]);
        assert_ne!(c.labels[0], c.labels[2]);
        assert_eq!(hull.boundary().isolated.len(), 1);
    }
    assert_eq!(r_convex_hull(&pts, 1e6).unwrap().components().count, 1);
}
