//! Smoothed bootstrap: resampling from the kernel density estimate.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::BandwidthMatrix;
use crate::geometry::{Point, PointSet};
use crate::seed;

/// Draws `m` points from `f_n`: each is a uniformly resampled `X_I` plus
/// `L Z` with `H = L L^T` and `Z` standard bivariate normal.
pub fn smoothed_bootstrap(points: &PointSet, h: &BandwidthMatrix, m: usize, seed: u64) -> PointSet {
    let mut out = Vec::with_capacity(m);
    smoothed_bootstrap_into(points.points(), h, m, seed, &mut out);
    PointSet::new(out).expect("resampled points are finite")
}

/// As [`smoothed_bootstrap`], writing into a reusable buffer.
pub fn smoothed_bootstrap_into(points: &[Point], h: &BandwidthMatrix, m: usize, seed: u64, out: &mut Vec<Point>) {
    out.clear();
    if points.is_empty() {
        return;
    }
    let (l11, l21, l22) = h.cholesky();
    let mut rng = seed::rng(seed);
    for _ in 0..m {
        let base = points[rng.gen_range(0..points.len())];
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        out.push(Point::new(base.x + l11 * z1, base.y + l21 * z1 + l22 * z2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_bandwidth_returns_originals() {
        let pts = PointSet::from_xy(&[(0.0, 1.0), (2.0, -3.0), (5.0, 5.0)]).unwrap();
        let h = BandwidthMatrix::isotropic(1e-9).unwrap();
        let b = smoothed_bootstrap(&pts, &h, 50, 1);
        for p in b.iter() {
            assert!(pts.iter().any(|q| q.dist(*p) < 1e-8));
        }
        assert_eq!(b, smoothed_bootstrap(&pts, &h, 50, 1));
        assert_ne!(b, smoothed_bootstrap(&pts, &h, 50, 2));
    }
}
