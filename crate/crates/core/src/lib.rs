//! Highest density region (HDR) estimation for bivariate samples.
//!
//! The crate has two estimators of the level set `{f >= f_tau}` that holds
//! probability `1 - tau`:
//!
//! * a plug-in estimator: a Gaussian kernel density estimate thresholded at the
//!   empirical `tau`-quantile of its values over the sample, with the region
//!   traced by marching squares ([`hdr::plugin_hdr`]);
//! * a hybrid estimator: smoothed-bootstrap calibrated thresholds split the sample
//!   into high- and low-density points, and the region is the r-convex hull of
//!   the high-density points, with `r` chosen as the largest radius whose hull
//!   still excludes every low-density point ([`hdr::hybrid_hdr`]).
//!
//! Supporting modules cover the exact planar geometry ([`geometry`]), kernel
//! density estimation and bandwidth selection ([`density`]), set-estimation
//! error criteria ([`metrics`]) and a normal-mixture simulation study
//! ([`simbench`]).
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature enables
//! the standard library in the dependencies; `parallel` runs bootstrap
//! replicates, Monte Carlo chunks and study replicates on rayon, and `serde`
//! derives serialization for configurations and results.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod contour;
pub mod density;
pub mod geometry;
pub mod hdr;
pub mod metrics;
pub mod seed;
pub mod simbench;

pub use geometry::{Point, PointSet};
