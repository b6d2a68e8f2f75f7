//! The hybrid estimator: bootstrap-calibrated thresholds and an r-convex hull
//! of the high-density sample points.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::estimate::{HdrEstimate, IterationRecord, Method, Thresholds};
use super::quantile::{quantile, quantile_sorted};
use super::r0::estimate_r0_with;
use super::region::Region;
use super::HdrError;
use crate::density::{kde_eval, smoothed_bootstrap_into, BandwidthMatrix, BandwidthSelector, BinnedKde};
use crate::geometry::{HullSkeleton, Point, PointSet};
use crate::seed;

/// Samples larger than this use the binned estimator for `f_n` at the sample.
const EXACT_SAMPLE_LIMIT: usize = 20_000;

/// Which density is evaluated at each bootstrap sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum BootstrapDensity {
    /// `f_n^*`, refitted on the bootstrap sample with the original bandwidth.
    #[default]
    Refit,
    /// The original `f_n`.
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct HybridConfig {
    pub tau: f64,
    /// Bootstrap replicates per iteration (`B`).
    pub bootstrap: usize,
    /// Quantile level applied to the bootstrap proportions, in `(0, 0.5]`.
    pub p: f64,
    pub step: f64,
    /// Hull radius as a fraction of the separating radius.
    pub nu: f64,
    pub seed: u64,
    pub selector: BandwidthSelector,
    /// Defaults to `ceil(tau / step) + 1`.
    pub max_iterations: Option<usize>,
    pub bootstrap_density: BootstrapDensity,
    /// Evaluate bootstrap densities by direct summation instead of binning.
    pub exact_bootstrap: bool,
    /// Bisection tolerance for the separating radius; defaults to `1e-4`
    /// times the sample diameter.
    pub r0_tol: Option<f64>,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            tau: 0.5,
            bootstrap: 250,
            p: 0.25,
            step: 0.025,
            nu: 1.0,
            seed: 0,
            selector: BandwidthSelector::Plugin,
            max_iterations: None,
            bootstrap_density: BootstrapDensity::Refit,
            exact_bootstrap: false,
            r0_tol: None,
        }
    }
}

impl HybridConfig {
    pub fn new(tau: f64, seed: u64) -> Self {
        HybridConfig {
            tau,
            seed,
            ..Default::default()
        }
    }

    /// Checks `0 < tau < 1`, `0 < step <= tau`, `0 < p <= 0.5`, `B >= 2` and
    /// `0 < nu <= 1`.
    ///
    /// `p` above one half would put the lower threshold above the upper one.
    pub fn validate(&self) -> Result<(), HdrError> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(HdrError::InvalidTau(self.tau));
        }
        if !(self.step > 0.0 && self.step <= self.tau) {
            return Err(HdrError::InvalidConfig("step must lie in (0, tau]"));
        }
        if !(self.p > 0.0 && self.p <= 0.5) {
            return Err(HdrError::InvalidConfig("p must lie in (0, 0.5]"));
        }
        if self.bootstrap < 2 {
            return Err(HdrError::InvalidConfig("at least two bootstrap replicates are needed"));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(HdrError::InvalidConfig("nu must lie in (0, 1]"));
        }
        if self.max_iterations == Some(0) {
            return Err(HdrError::InvalidConfig("max_iterations must be positive"));
        }
        Ok(())
    }

    pub fn iteration_limit(&self) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (self.tau / self.step - 1e-9).ceil() as usize + 1)
    }
}

/// Sorted bootstrap density values, kept across calls.
///
/// Replicate `i` of iteration `k` is drawn from the stream
/// `seed::derive_path(seed, [k, i])` and does not depend on `tau`, `p` or the
/// number of replicates requested, so one bank answers every such
/// configuration for a fixed sample, bandwidth and seed.
#[derive(Debug, Clone)]
pub struct BootstrapBank {
    seed: u64,
    bandwidth: BandwidthMatrix,
    density: BootstrapDensity,
    exact: bool,
    sorted: Vec<Vec<Vec<f64>>>,
}

impl BootstrapBank {
    pub fn new(seed: u64, bandwidth: BandwidthMatrix, density: BootstrapDensity, exact: bool) -> Self {
        BootstrapBank {
            seed,
            bandwidth,
            density,
            exact,
            sorted: Vec::new(),
        }
    }

    pub fn for_config(cfg: &HybridConfig, bandwidth: BandwidthMatrix) -> Self {
        Self::new(cfg.seed, bandwidth, cfg.bootstrap_density, cfg.exact_bootstrap)
    }

    fn matches(&self, cfg: &HybridConfig, bandwidth: &BandwidthMatrix) -> bool {
        self.seed == cfg.seed && self.bandwidth == *bandwidth && self.density == cfg.bootstrap_density && self.exact == cfg.exact_bootstrap
    }

    /// Sorted density values of replicates `0..count` of iteration `k`.
    fn replicates(&mut self, points: &[Point], k: usize, count: usize) -> &[Vec<f64>] {
        while self.sorted.len() <= k {
            self.sorted.push(Vec::new());
        }
        let have = self.sorted[k].len();
        if have < count {
            let fresh = draw_replicates(points, &self.bandwidth, self.seed, k, have..count, self.density, self.exact);
            self.sorted[k].extend(fresh);
        }
        &self.sorted[k][..count]
    }
}

fn one_replicate(points: &[Point], h: &BandwidthMatrix, stream: u64, density: BootstrapDensity, exact: bool, original: Option<&BinnedKde>) -> Vec<f64> {
    let mut sample = Vec::with_capacity(points.len());
    smoothed_bootstrap_into(points, h, points.len(), stream, &mut sample);
    let mut values = match (density, exact) {
        (BootstrapDensity::Refit, false) => BinnedKde::new(&sample, h).eval_all(&sample),
        (BootstrapDensity::Refit, true) => {
            let set = PointSet::new(sample).expect("finite bootstrap sample");
            kde_eval(&set, h, &set)
        }
        (BootstrapDensity::Original, false) => original.map(|b| b.eval_all(&sample)).unwrap_or_default(),
        (BootstrapDensity::Original, true) => {
            let base = PointSet::new(points.to_vec()).expect("finite sample");
            kde_eval(&base, h, &PointSet::new(sample).expect("finite bootstrap sample"))
        }
    };
    values.sort_by(f64::total_cmp);
    values
}

fn draw_replicates(
    points: &[Point],
    h: &BandwidthMatrix,
    root: u64,
    k: usize,
    range: core::ops::Range<usize>,
    density: BootstrapDensity,
    exact: bool,
) -> Vec<Vec<f64>> {
    let stream = |i: usize| seed::derive_path(root, &[k as u64, i as u64]);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        range
            .into_par_iter()
            .map(|i| {
                let original = (density == BootstrapDensity::Original && !exact).then(|| BinnedKde::new(points, h));
                one_replicate(points, h, stream(i), density, exact, original.as_ref())
            })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let original = (density == BootstrapDensity::Original && !exact).then(|| BinnedKde::new(points, h));
        range
            .map(|i| one_replicate(points, h, stream(i), density, exact, original.as_ref()))
            .collect()
    }
}

/// Number of values `>= level` in a sorted slice.
fn count_at_least(sorted: &[f64], level: f64) -> usize {
    sorted.len() - sorted.partition_point(|&v| v < level)
}

/// Runs the hybrid estimator with a fresh bootstrap bank.
pub fn hybrid_hdr(points: &PointSet, cfg: &HybridConfig) -> Result<HdrEstimate, HdrError> {
    cfg.validate()?;
    let h = cfg.selector.select(points)?;
    let mut bank = BootstrapBank::for_config(cfg, h);
    hybrid_hdr_with_bank(points, cfg, &mut bank)
}

/// Runs the hybrid estimator, drawing bootstrap replicates from `bank`.
///
/// The bank's bandwidth is used as `f_n`'s bandwidth. A bank built for a
/// different seed or bootstrap mode is replaced.
///
/// Each iteration: the level `(f_n)_tau_bar` is the `tau_bar`-quantile of `f_n`
/// over the sample; for each bootstrap sample the fractions of its points with
/// bootstrap density at or above (`tau_plus*`) and below (`tau_minus*`) the
/// level are recorded; their `p`-quantiles give the thresholds `lower`
/// (`tau_minus`-quantile of `f_n`) and `upper` (`(1 - tau_plus)`-quantile).
/// Points with `f_n >= upper` form `X+`, points with `f_n < lower` form `X-`,
/// and the region is the r-convex hull of `X+` at `nu` times the largest
/// radius whose hull avoids `X-`. The loop stops once the region covers at
/// least `1 - tau` of the sample and otherwise lowers `tau_bar` by `step`.
pub fn hybrid_hdr_with_bank(points: &PointSet, cfg: &HybridConfig, bank: &mut BootstrapBank) -> Result<HdrEstimate, HdrError> {
    cfg.validate()?;
    let n = points.len();
    if n < 3 {
        return Err(HdrError::TooFewPoints { needed: 3, got: n });
    }
    let h = bank.bandwidth;
    if !bank.matches(cfg, &h) {
        *bank = BootstrapBank::for_config(cfg, h);
    }
    let f: Vec<f64> = if n <= EXACT_SAMPLE_LIMIT {
        kde_eval(points, &h, points)
    } else {
        BinnedKde::new(points.points(), &h).eval_all(points.points())
    };
    let mut sorted = f.clone();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let limit = cfg.iteration_limit();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut k = 0;
    loop {
        let tau_bar = cfg.tau - k as f64 * cfg.step;
        let level = quantile_sorted(&sorted, tau_bar);
        let reps = bank.replicates(points.points(), k, cfg.bootstrap);
        let plus_frac: Vec<f64> = reps.iter().map(|r| count_at_least(r, level) as f64 / nf).collect();
        let minus_frac: Vec<f64> = plus_frac.iter().map(|&v| (nf - v * nf).round() / nf).collect();
        let tau_plus = quantile(&plus_frac, cfg.p);
        let tau_minus = quantile(&minus_frac, cfg.p);
        let lower = quantile_sorted(&sorted, tau_minus);
        let upper = quantile_sorted(&sorted, 1.0 - tau_plus);

        let plus_idx: Vec<usize> = (0..n).filter(|&i| f[i] >= upper).collect();
        let minus_idx: Vec<usize> = (0..n).filter(|&i| f[i] < lower).collect();
        let dn = (upper - level).max(level - lower);
        let mut record = IterationRecord {
            tau_bar,
            level,
            tau_minus,
            tau_plus,
            lower,
            upper,
            n_plus: plus_idx.len(),
            n_minus: minus_idx.len(),
            n_doubtful: n - plus_idx.len() - minus_idx.len(),
            r0: f64::NAN,
            convex_fallback: false,
            coverage: 0.0,
            dn,
        };
        if plus_idx.is_empty() {
            trace.push(record);
            return Err(HdrError::EmptyPlusSet { trace });
        }
        let x_plus = points.select(&plus_idx);
        let x_minus: Vec<Point> = minus_idx.iter().map(|&i| points.points()[i]).collect();
        let skeleton = Arc::new(HullSkeleton::new(&x_plus)?);
        let r0 = estimate_r0_with(&skeleton, &x_minus, cfg.r0_tol)?;
        let radius = if r0.convex_fallback { f64::INFINITY } else { cfg.nu * r0.radius };
        let hull = skeleton.hull(radius)?;
        let inside = points.iter().filter(|&&p| hull.contains(p)).count();
        let coverage = inside as f64 / nf;
        record.r0 = r0.radius;
        record.convex_fallback = r0.convex_fallback;
        record.coverage = coverage;
        trace.push(record);

        let converged = coverage >= 1.0 - cfg.tau;
        let next_tau_bar = cfg.tau - (k + 1) as f64 * cfg.step;
        if converged || k + 1 >= limit || next_tau_bar <= 1e-12 {
            let components = hull.components().count;
            return Ok(HdrEstimate {
                method: Method::Hybrid,
                tau: cfg.tau,
                tau_bar,
                region: Region::Hull(hull),
                thresholds: Thresholds {
                    level,
                    lower: Some(lower),
                    upper: Some(upper),
                },
                coverage,
                r0: Some(r0.radius),
                radius: Some(radius),
                dn: Some(dn),
                trace,
                bandwidth: h,
                sample_density: f,
                converged,
                components,
            });
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normal_sample(n: usize, s: u64) -> PointSet {
        let mut rng = seed::rng(s);
        PointSet::new(
            (0..n)
                .map(|_| Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(HybridConfig::new(0.5, 1).validate().is_ok());
        assert!(HybridConfig { p: 0.6, ..HybridConfig::new(0.5, 1) }.validate().is_err());
        assert!(HybridConfig { step: 0.6, ..HybridConfig::new(0.5, 1) }.validate().is_err());
        assert!(HybridConfig::new(1.0, 1).validate().is_err());
        assert_eq!(HybridConfig::new(0.8, 1).iteration_limit(), 33);
    }

    #[test]
    fn deterministic_and_covering() {
        let pts = normal_sample(300, 5);
        let cfg = HybridConfig {
            bootstrap: 20,
            ..HybridConfig::new(0.5, 77)
        };
        let a = hybrid_hdr(&pts, &cfg).unwrap();
        let b = hybrid_hdr(&pts, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert!(a.converged);
        assert!(a.coverage >= 0.5);
        super::super::verify_hybrid_contract(&pts, &a, cfg.step).unwrap();
    }

    #[test]
    fn bank_prefix_reuse_matches_fresh_runs() {
        let pts = normal_sample(200, 8);
        let cfg = HybridConfig {
            bootstrap: 30,
            ..HybridConfig::new(0.8, 3)
        };
        let h = cfg.selector.select(&pts).unwrap();
        let mut bank = BootstrapBank::for_config(&cfg, h);
        let _ = hybrid_hdr_with_bank(&pts, &HybridConfig { tau: 0.5, ..cfg }, &mut bank).unwrap();
        let shared = hybrid_hdr_with_bank(&pts, &HybridConfig { bootstrap: 12, ..cfg }, &mut bank).unwrap();
        let fresh = hybrid_hdr(&pts, &HybridConfig { bootstrap: 12, ..cfg }).unwrap();
        assert_eq!(shared.trace, fresh.trace);
    }
}
