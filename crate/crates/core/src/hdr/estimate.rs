//! Estimation results and the checks they must satisfy.

use alloc::vec::Vec;

use super::region::Region;
use crate::density::BandwidthMatrix;
use crate::geometry::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    Hybrid,
    Plugin,
}

/// Density thresholds of one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Thresholds {
    /// `tau_bar`-quantile of `f_n` over the sample.
    pub level: f64,
    /// Upper bound for low-density points (hybrid only).
    pub lower: Option<f64>,
    /// Lower bound for high-density points (hybrid only).
    pub upper: Option<f64>,
}

/// One pass of the hybrid loop.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub tau_bar: f64,
    pub level: f64,
    /// Bootstrap quantile of the fraction of points below `level`.
    pub tau_minus: f64,
    /// Bootstrap quantile of the fraction of points at or above `level`.
    pub tau_plus: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_doubtful: usize,
    /// Separating radius; `+inf` on convex fallback.
    pub r0: f64,
    pub convex_fallback: bool,
    pub coverage: f64,
    /// `max(upper - level, level - lower)`, reported only.
    pub dn: f64,
}

/// An estimated highest density region.
#[derive(Debug, Clone)]
pub struct HdrEstimate {
    pub method: Method,
    pub tau: f64,
    pub tau_bar: f64,
    pub region: Region,
    pub thresholds: Thresholds,
    /// Fraction of the sample inside the region.
    pub coverage: f64,
    /// Separating radius (hybrid only, `+inf` on convex fallback).
    pub r0: Option<f64>,
    /// Radius of the returned hull, `nu * r0` (hybrid only).
    pub radius: Option<f64>,
    pub dn: Option<f64>,
    pub trace: Vec<IterationRecord>,
    pub bandwidth: BandwidthMatrix,
    /// `f_n` at every sample point, in input order.
    pub sample_density: Vec<f64>,
    /// `false` when the hybrid loop ran out of iterations before reaching
    /// the coverage target; the last region is still returned.
    pub converged: bool,
    pub components: usize,
}

/// A broken invariant found by [`verify_hybrid_contract`].
#[derive(Debug, Clone, PartialEq)]
pub enum ContractViolation {
    Coverage { coverage: f64, target: f64 },
    ThresholdOrder { iteration: usize, lower: f64, upper: f64 },
    Split { iteration: usize },
    Trace { iteration: usize },
    CoverageMismatch { reported: f64, recomputed: f64 },
}

/// Re-derives the hybrid invariants from an estimate and its sample:
/// coverage target on convergence, `lower <= upper`, the point split sizes
/// implied by the thresholds, the `tau_bar` sequence and the reported
/// coverage.
///
/// `level` itself is not required to lie between the thresholds: the refitted
/// bootstrap density is smoother than `f_n`, so the bootstrap proportion below
/// `level` tends to exceed `tau_bar` and `lower` can land above `level`.
pub fn verify_hybrid_contract(points: &PointSet, est: &HdrEstimate, step: f64) -> Result<(), ContractViolation> {
    let n = points.len();
    let f = &est.sample_density;
    let recomputed = points.iter().filter(|&&p| est.region.contains(p)).count() as f64 / n as f64;
    if recomputed != est.coverage {
        return Err(ContractViolation::CoverageMismatch {
            reported: est.coverage,
            recomputed,
        });
    }
    if est.converged && est.coverage < 1.0 - est.tau {
        return Err(ContractViolation::Coverage {
            coverage: est.coverage,
            target: 1.0 - est.tau,
        });
    }
    for (k, rec) in est.trace.iter().enumerate() {
        if rec.lower > rec.upper {
            return Err(ContractViolation::ThresholdOrder {
                iteration: k,
                lower: rec.lower,
                upper: rec.upper,
            });
        }
        let plus = f.iter().filter(|&&v| v >= rec.upper).count();
        let minus = f.iter().filter(|&&v| v < rec.lower).count();
        let both = f.iter().filter(|&&v| v >= rec.upper && v < rec.lower).count();
        if plus != rec.n_plus || minus != rec.n_minus || both != 0 || plus + minus + rec.n_doubtful != n {
            return Err(ContractViolation::Split { iteration: k });
        }
        let expected = est.tau - k as f64 * step;
        if (rec.tau_bar - expected).abs() > 1e-9 || rec.tau_bar <= 0.0 {
            return Err(ContractViolation::Trace { iteration: k });
        }
    }
    Ok(())
}
