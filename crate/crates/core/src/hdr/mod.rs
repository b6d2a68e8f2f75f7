//! Highest density region estimators.

mod estimate;
mod hybrid;
mod plugin;
mod quantile;
mod r0;
mod region;

pub use estimate::{verify_hybrid_contract, ContractViolation, HdrEstimate, IterationRecord, Method, Thresholds};
pub use hybrid::{hybrid_hdr, hybrid_hdr_with_bank, BootstrapBank, BootstrapDensity, HybridConfig};
pub use plugin::{plugin_hdr, plugin_hdr_with_bandwidth, PluginConfig};
pub use quantile::{hyndman_threshold, quantile, quantile_sorted};
pub use r0::{estimate_r0, R0Estimate};
pub use region::{coverage, Region};

use alloc::vec::Vec;

use crate::density::DensityError;
use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HdrError {
    #[error("tau must lie in (0, 1), got {0}")]
    InvalidTau(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("density values must be finite and non-negative")]
    InvalidValues,
    #[error("threshold {level} exceeds the grid maximum {max}; the grid is too coarse")]
    EmptyRegion { level: f64, max: f64 },
    #[error("no sample point reaches the upper threshold at iteration {}", trace.len())]
    EmptyPlusSet { trace: Vec<IterationRecord> },
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
