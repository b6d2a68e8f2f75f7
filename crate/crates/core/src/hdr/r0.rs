//! Largest hull radius separating high-density from low-density points.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::HdrError;
use crate::geometry::{diameter_of, HullSkeleton, KdTree, Point, PointSet};

/// Outcome of [`estimate_r0`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct R0Estimate {
    /// Lower end of the final bracket; `+inf` when the convex hull already
    /// excludes every low-density point.
    pub radius: f64,
    pub convex_fallback: bool,
    /// Final bisection bracket.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Bisection for `sup{g > 0 : C_g(x_plus) contains no point of x_minus}`.
///
/// The bracket starts at half the smallest nearest-neighbour distance in
/// `x_plus` and the diameter of `x_plus` and `x_minus` together. Hull
/// membership grows with the radius, so the predicate is monotone. `tol`
/// defaults to `1e-4` times that diameter.
///
/// When the convex hull excludes every low-density point the result is the
/// convex hull fallback (`radius = +inf`). When the predicate holds at the
/// upper end anyway, that end is returned. When it fails even at the lower end (a
/// low-density point coincides with a high-density one) the lower end is
/// returned.
pub fn estimate_r0(x_plus: &PointSet, x_minus: &PointSet, tol: Option<f64>) -> Result<R0Estimate, HdrError> {
    let skeleton = Arc::new(HullSkeleton::new(x_plus)?);
    estimate_r0_with(&skeleton, x_minus.points(), tol)
}

pub(crate) fn estimate_r0_with(skeleton: &Arc<HullSkeleton>, x_minus: &[Point], tol: Option<f64>) -> Result<R0Estimate, HdrError> {
    let fallback = |hi: f64| R0Estimate {
        radius: f64::INFINITY,
        convex_fallback: true,
        bracket: (hi, f64::INFINITY),
        iterations: 0,
    };
    let convex = skeleton.convex_hull();
    // points outside the convex hull are outside every r-convex hull
    let candidates: Vec<Point> = x_minus.iter().copied().filter(|&p| convex.contains(p)).collect();
    let mut all: Vec<Point> = skeleton.vertices().to_vec();
    all.extend_from_slice(x_minus);
    let hi = diameter_of(&all);
    if candidates.is_empty() || hi == 0.0 {
        return Ok(fallback(hi));
    }
    let tol = tol.unwrap_or(1e-4 * hi);
    let separates = |g: f64| -> Result<bool, HdrError> {
        let hull = skeleton.hull(g)?;
        Ok(!candidates.iter().any(|&p| hull.contains(p)))
    };
    if separates(hi)? {
        // a candidate on a convex hull edge is cut off at every finite radius
        return Ok(R0Estimate {
            radius: hi,
            convex_fallback: false,
            bracket: (hi, f64::INFINITY),
            iterations: 0,
        });
    }
    let verts = skeleton.vertices();
    let tree = KdTree::new(verts);
    let mut min_nn = f64::INFINITY;
    for (i, &v) in verts.iter().enumerate() {
        tree.for_each_within(v, min_nn.min(hi), |j, q| {
            if j != i {
                min_nn = min_nn.min(v.dist(q));
            }
        });
    }
    let mut lo = if min_nn.is_finite() { 0.5 * min_nn } else { tol };
    let mut hi = hi;
    let mut iterations = 0;
    if !separates(lo)? {
        return Ok(R0Estimate {
            radius: lo,
            convex_fallback: false,
            bracket: (lo, lo),
            iterations,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if separates(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(R0Estimate {
        radius: lo,
        convex_fallback: false,
        bracket: (lo, hi),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_centre() {
        let plus = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let minus = PointSet::from_xy(&[(0.5, 0.5)]).unwrap();
        let r = estimate_r0(&plus, &minus, None).unwrap();
        assert!(!r.convex_fallback);
        assert!((r.radius - 0.5f64.sqrt()).abs() < 1e-3, "{r:?}");
        assert!(r.bracket.1 - r.bracket.0 <= 1e-4 * 2f64.sqrt());
    }

    #[test]
    fn fallbacks() {
        let plus = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        assert!(estimate_r0(&plus, &PointSet::default(), None).unwrap().convex_fallback);
        let far = PointSet::from_xy(&[(100.0, 100.0)]).unwrap();
        let r = estimate_r0(&plus, &far, None).unwrap();
        assert!(r.convex_fallback && r.radius.is_infinite());
    }

    #[test]
    fn point_on_hull_edge_keeps_a_finite_radius() {
        let plus = PointSet::from_xy(&[(0.0, 0.0), (0.0, 1.0), (2.0, 0.5)]).unwrap();
        let minus = PointSet::from_xy(&[(0.0, 0.4)]).unwrap();
        let r = estimate_r0(&plus, &minus, None).unwrap();
        assert!(!r.convex_fallback && r.radius.is_finite(), "{r:?}");
    }
}
