//! The plug-in estimator: the level set of the kernel density estimate at the
//! sample quantile of its own values.

use alloc::vec::Vec;

use super::estimate::{HdrEstimate, Method, Thresholds};
use super::quantile::hyndman_threshold;
use super::region::Region;
use super::HdrError;
use crate::contour::marching_squares;
use crate::density::{kde_eval, kde_grid, BandwidthMatrix, BandwidthSelector, GridSpec};
use crate::geometry::PointSet;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PluginConfig {
    pub tau: f64,
    pub selector: BandwidthSelector,
    /// Evaluation grid; by default the sample bounding box padded by
    /// `pad_sigmas` kernel standard deviations.
    pub grid: Option<GridSpec>,
    pub resolution: usize,
    pub pad_sigmas: f64,
}

impl Default for PluginConfig {
    fn default() -> Self {
        PluginConfig {
            tau: 0.5,
            selector: BandwidthSelector::Plugin,
            grid: None,
            resolution: 256,
            pad_sigmas: 3.0,
        }
    }
}

impl PluginConfig {
    pub fn new(tau: f64) -> Self {
        PluginConfig {
            tau,
            ..Default::default()
        }
    }
}

pub fn plugin_hdr(points: &PointSet, cfg: &PluginConfig) -> Result<HdrEstimate, HdrError> {
    if !(cfg.tau > 0.0 && cfg.tau < 1.0) {
        return Err(HdrError::InvalidTau(cfg.tau));
    }
    let h = cfg.selector.select(points)?;
    plugin_hdr_with_bandwidth(points, cfg, h)
}

/// Contours `{f_n >= c}` on the grid, where `c` is the `tau`-quantile of
/// `f_n` over the sample.
pub fn plugin_hdr_with_bandwidth(points: &PointSet, cfg: &PluginConfig, h: BandwidthMatrix) -> Result<HdrEstimate, HdrError> {
    if !(cfg.tau > 0.0 && cfg.tau < 1.0) {
        return Err(HdrError::InvalidTau(cfg.tau));
    }
    if points.is_empty() {
        return Err(HdrError::TooFewPoints { needed: 1, got: 0 });
    }
    if cfg.resolution < 2 {
        return Err(HdrError::InvalidConfig("resolution must be at least 2"));
    }
    let f = kde_eval(points, &h, points);
    let level = hyndman_threshold(&f, cfg.tau)?;
    let grid = match cfg.grid {
        Some(g) => g,
        None => GridSpec::around(points.points(), cfg.pad_sigmas * h.max_sigma(), cfg.resolution, cfg.resolution)?,
    };
    let field = kde_grid(points, &h, &grid)?;
    let max = field.max();
    if level > max {
        return Err(HdrError::EmptyRegion { level, max });
    }
    let polygons = marching_squares(&field, level);
    let components = polygons.components();
    let region = Region::Contour(polygons);
    let inside = points.iter().filter(|&&p| region.contains(p)).count();
    Ok(HdrEstimate {
        method: Method::Plugin,
        tau: cfg.tau,
        tau_bar: cfg.tau,
        region,
        thresholds: Thresholds {
            level,
            lower: None,
            upper: None,
        },
        coverage: inside as f64 / points.len() as f64,
        r0: None,
        radius: None,
        dn: None,
        trace: Vec::new(),
        bandwidth: h,
        sample_density: f,
        converged: true,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn normal_sample_region_is_one_disk_like_set() {
        let mut rng = seed::rng(4);
        let pts = PointSet::new(
            (0..1000)
                .map(|_| Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        )
        .unwrap();
        let est = plugin_hdr(&pts, &PluginConfig::new(0.5)).unwrap();
        assert_eq!(est.components, 1);
        assert!(est.region.contains(Point::new(0.0, 0.0)));
        assert!(!est.region.contains(Point::new(2.5, 0.0)));
        assert!((est.coverage - 0.5).abs() < 0.05, "coverage {}", est.coverage);
    }

    #[test]
    fn coarse_grid_can_miss_the_level() {
        let pts = PointSet::from_xy(&[(0.0, 0.0), (0.01, 0.0), (0.0, 0.01), (5.0, 5.0)]).unwrap();
        let h = BandwidthMatrix::isotropic(1e-6).unwrap();
        let cfg = PluginConfig {
            resolution: 3,
            ..PluginConfig::new(0.5)
        };
        assert!(matches!(
            plugin_hdr_with_bandwidth(&pts, &cfg, h),
            Err(HdrError::EmptyRegion { .. })
        ));
    }
}
