//! The true highest density region of a mixture.

use alloc::vec::Vec;

use super::{MixtureModel, SimError};
use crate::contour::{marching_squares, PolygonSet};
use crate::density::{DensityField, GridSpec};
use crate::geometry::Point;
use crate::hdr::{quantile, quantile_sorted};
use crate::metrics::RegionHandle;
use crate::seed;

/// Monte Carlo draws used for the threshold by default.
pub const DEFAULT_TRUTH_DRAWS: usize = 1_000_000;
const BATCHES: usize = 10;

/// `{f >= f_tau}` for a known mixture density `f`.
///
/// Membership is decided by the density itself; the contour polygons provide
/// the boundary sample and the component count.
#[derive(Debug, Clone)]
pub struct TrueHdr {
    model: MixtureModel,
    pub tau: f64,
    pub level: f64,
    /// Standard error of `level`, from the spread of batch quantiles.
    pub level_std_error: f64,
    pub polygons: PolygonSet,
}

impl TrueHdr {
    pub fn model(&self) -> &MixtureModel {
        &self.model
    }

    pub fn components(&self) -> usize {
        self.polygons.components()
    }

    /// Probability content of a region, by Monte Carlo over `m` model draws.
    pub fn probability_of<R: RegionHandle + ?Sized>(&self, region: &R, m: usize, seed: u64) -> f64 {
        let draws = self.model.sample(m, seed);
        draws.iter().filter(|&&p| region.contains(p)).count() as f64 / m as f64
    }
}

impl RegionHandle for TrueHdr {
    fn contains(&self, p: Point) -> bool {
        self.model.density(p) >= self.level
    }
    fn boundary_points(&self, spacing: f64) -> Vec<Point> {
        self.polygons.boundary_points(spacing)
    }
}

/// Default contouring grid: `[-4, 4]^2` with 801 nodes per axis.
pub fn default_truth_grid() -> GridSpec {
    GridSpec::new(-4.0, 4.0, -4.0, 4.0, 801, 801).expect("valid grid")
}

/// `f_tau` is the `tau`-quantile of `f(Y)` over `draws` model draws
/// (`P(f(Y) >= f_tau) = 1 - tau`); the region is contoured on `grid`.
pub fn true_hdr(model: &MixtureModel, tau: f64, grid: &GridSpec, draws: usize, seed: u64) -> Result<TrueHdr, SimError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(SimError::InvalidTau(tau));
    }
    if draws < BATCHES {
        return Err(SimError::InvalidConfig("too few Monte Carlo draws"));
    }
    grid.validate()?;
    let pts = model.sample(draws, seed);
    let mut values: Vec<f64> = pts.iter().map(|&p| model.density(p)).collect();
    let per = draws / BATCHES;
    let batch: Vec<f64> = values.chunks(per).take(BATCHES).map(|c| quantile(c, tau)).collect();
    let mean = batch.iter().sum::<f64>() / BATCHES as f64;
    let var = batch.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (BATCHES - 1) as f64;
    values.sort_by(f64::total_cmp);
    let level = quantile_sorted(&values, tau);
    let field = DensityField::from_fn(*grid, |p| model.density(p));
    Ok(TrueHdr {
        model: model.clone(),
        tau,
        level,
        level_std_error: (var / BATCHES as f64).sqrt(),
        polygons: marching_squares(&field, level),
    })
}

/// [`true_hdr`] with the default grid and draw count, seeded from the model id
/// and `tau`.
pub fn true_hdr_default(model: &MixtureModel, tau: f64) -> Result<TrueHdr, SimError> {
    let s = seed::derive_path(0x7255_4844, &[model.id as u64, tau.to_bits()]);
    true_hdr(model, tau, &default_truth_grid(), DEFAULT_TRUTH_DRAWS, s)
}
