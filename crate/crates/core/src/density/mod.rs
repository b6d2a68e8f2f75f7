//! Bivariate Gaussian kernel density estimation.
//!
//! Bandwidths are covariance-scale matrices: the kernel centered at `X_i` is
//! the `N(X_i, H)` density, so `f_n(x) = (1/n) sum_i phi_H(x - X_i)`.

mod bandwidth;
mod binned;
mod bootstrap;
mod kde;

pub use bandwidth::{
    bandwidth_lscv, bandwidth_normal_scale, bandwidth_plugin, lscv_score, BandwidthMatrix, BandwidthSelector,
    LscvGrid, LscvSelection,
};
pub use binned::BinnedKde;
pub use bootstrap::{smoothed_bootstrap, smoothed_bootstrap_into};
pub use kde::{kde_eval, kde_eval_at, kde_grid, DensityField, GridSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DensityError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("sample covariance is singular")]
    DegenerateSample,
    #[error("bandwidth matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
}

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DensityWarning {
    /// The cross-validation criterion was constant over the search grid; the
    /// normal-scale bandwidth was returned.
    FlatObjective,
}

/// Mean and sample covariance (`n - 1` denominator) as `(mean, [s11, s12, s22])`.
pub(crate) fn moments(points: &[crate::Point]) -> (crate::Point, [f64; 3]) {
    let n = points.len() as f64;
    let mut mx = 0.0;
    let mut my = 0.0;
    for p in points {
        mx += p.x;
        my += p.y;
    }
    mx /= n;
    my /= n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let dx = p.x - mx;
        let dy = p.y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let d = (n - 1.0).max(1.0);
    (crate::Point::new(mx, my), [sxx / d, sxy / d, syy / d])
}
