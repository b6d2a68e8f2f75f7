//! Replicated comparison of the hybrid and plug-in estimators against the
//! true regions of the benchmark mixtures.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::truth::{default_truth_grid, true_hdr, TrueHdr, DEFAULT_TRUTH_DRAWS};
use super::{MixtureModel, SimError};
use crate::density::{BandwidthMatrix, BandwidthSelector, GridSpec};
use crate::geometry::PointSet;
use crate::hdr::{
    hybrid_hdr_with_bank, plugin_hdr_with_bandwidth, verify_hybrid_contract, BootstrapBank, BootstrapDensity, HdrEstimate,
    HybridConfig, PluginConfig,
};
use crate::metrics::{boundary_hausdorff, distance_in_measure, Rect};
use crate::seed;

/// The six bootstrap quantile levels `p1..p6`.
pub const P_LEVELS: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "method", rename_all = "snake_case"))]
pub enum Estimator {
    Hybrid { bootstrap: usize, p: f64 },
    /// Plug-in with the two-stage plug-in bandwidth.
    PluginH1,
    /// Plug-in with the cross-validation bandwidth.
    PluginH2,
}

impl Estimator {
    pub fn label(&self) -> String {
        match self {
            Estimator::Hybrid { bootstrap, p } => format!("hybrid B={bootstrap} p={p}"),
            Estimator::PluginH1 => "plugin H1".to_string(),
            Estimator::PluginH2 => "plugin H2".to_string(),
        }
    }

    fn order(&self) -> (u8, usize, u64) {
        match self {
            Estimator::Hybrid { bootstrap, p } => (0, *bootstrap, p.to_bits()),
            Estimator::PluginH1 => (1, 0, 0),
            Estimator::PluginH2 => (2, 0, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct StudyConfig {
    pub models: Vec<u8>,
    pub taus: Vec<f64>,
    pub ns: Vec<usize>,
    pub bootstraps: Vec<usize>,
    pub ps: Vec<f64>,
    pub step: f64,
    pub nu: f64,
    pub replicates: usize,
    pub seed: u64,
    pub plugin_h1: bool,
    pub plugin_h2: bool,
    /// `p` of the hybrid rows used in quotients and ratio rows.
    pub reference_p: f64,
    pub boundary_spacing: f64,
    pub mc_samples: usize,
    pub region_box: Rect,
    pub truth_draws: usize,
    pub truth_grid: Option<GridSpec>,
    pub plugin_resolution: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            models: (1..=9).collect(),
            taus: alloc::vec![0.5, 0.8],
            ns: alloc::vec![500, 1000],
            bootstraps: alloc::vec![100, 250],
            ps: P_LEVELS.to_vec(),
            step: 0.025,
            nu: 1.0,
            replicates: 50,
            seed: 2020,
            plugin_h1: true,
            plugin_h2: true,
            reference_p: P_LEVELS[2],
            boundary_spacing: crate::metrics::DEFAULT_BOUNDARY_SPACING,
            mc_samples: crate::metrics::DEFAULT_MC_SAMPLES,
            region_box: Rect::square(3.0),
            truth_draws: DEFAULT_TRUTH_DRAWS,
            truth_grid: None,
            plugin_resolution: 256,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.models.is_empty() || self.taus.is_empty() || self.ns.is_empty() {
            return Err(SimError::InvalidConfig("models, taus and ns must be nonempty"));
        }
        if let Some(&m) = self.models.iter().find(|&&m| MixtureModel::catalog(m).is_none()) {
            return Err(SimError::UnknownModel(m));
        }
        if let Some(&t) = self.taus.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
            return Err(SimError::InvalidTau(t));
        }
        if self.replicates == 0 {
            return Err(SimError::InvalidConfig("replicates must be positive"));
        }
        if self.ns.iter().any(|&n| n < 20) {
            return Err(SimError::InvalidConfig("sample sizes must be at least 20"));
        }
        if self.ps.iter().any(|&p| !(p > 0.0 && p <= 0.5)) || self.bootstraps.iter().any(|&b| b < 2) {
            return Err(SimError::InvalidConfig("p must lie in (0, 0.5] and B be at least 2"));
        }
        if self.mc_samples < 10_000 {
            return Err(SimError::InvalidConfig("at least 10000 Monte Carlo points are needed"));
        }
        if !(self.boundary_spacing > 0.0) || !(self.region_box.area() > 0.0) {
            return Err(SimError::InvalidConfig("spacing and box must be positive"));
        }
        Ok(())
    }

    pub fn estimators(&self) -> Vec<Estimator> {
        let mut out = Vec::new();
        for &bootstrap in &self.bootstraps {
            for &p in &self.ps {
                out.push(Estimator::Hybrid { bootstrap, p });
            }
        }
        if self.plugin_h1 {
            out.push(Estimator::PluginH1);
        }
        if self.plugin_h2 {
            out.push(Estimator::PluginH2);
        }
        out
    }

    /// Seed of the sample for replicate `rep` of `(model, n)`; shared by every
    /// `tau` and estimator.
    pub fn sample_seed(&self, model: u8, n: usize, rep: usize) -> u64 {
        seed::derive_path(self.seed, &[model as u64, n as u64, rep as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicateResult {
    pub replicate: usize,
    pub hausdorff: f64,
    pub measure: f64,
    pub measure_std_error: f64,
    pub components: usize,
    pub coverage: f64,
    pub converged: bool,
    pub tau_bar: f64,
    pub contract_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl Summary {
    /// Sample mean and standard deviation; the deviation is zero for a
    /// single value and both are NaN for none.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                sd: f64::NAN,
                count: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, sd, count: n }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "flag", rename_all = "snake_case"))]
pub enum CellFlag {
    /// One replicate only: the SD is reported as zero.
    SingleReplicate,
    /// Some replicates failed; their causes are in `failures`.
    PartialFailure { failed: usize },
    /// Every replicate failed.
    Failed { cause: String },
    NotConverged { count: usize },
    ContractViolation { count: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellReport {
    pub model: u8,
    pub tau: f64,
    pub n: usize,
    pub estimator: Estimator,
    pub hausdorff: Summary,
    pub measure: Summary,
    pub replicates: Vec<ReplicateResult>,
    pub failures: Vec<(usize, String)>,
    pub flags: Vec<CellFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum QuotientKind {
    /// Hybrid mean at n = 500 over n = 1000, tau = 0.5, B = 100.
    Q1,
    /// Hybrid mean at n = 500 over n = 1000, tau = 0.8, B = 250.
    Q2,
    /// Hybrid mean at B = 100 over B = 250, n = 500, tau = 0.5.
    Q3,
    /// Hybrid mean over plug-in H1 mean.
    HybridOverH1,
    /// Hybrid mean over plug-in H2 mean.
    HybridOverH2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quotient {
    pub kind: QuotientKind,
    pub model: u8,
    pub tau: f64,
    /// Sample size of the numerator cell.
    pub n: usize,
    /// Bootstrap size of the numerator cell.
    pub bootstrap: usize,
    pub hausdorff: f64,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorReport {
    pub config: StudyConfig,
    /// Parameters of every model in the study.
    pub models: Vec<String>,
    /// True thresholds `(model, tau, level, level standard error)`.
    pub truth_levels: Vec<(u8, f64, f64, f64)>,
    pub cells: Vec<CellReport>,
    pub quotients: Vec<Quotient>,
}

impl ErrorReport {
    pub fn cell(&self, model: u8, tau: f64, n: usize, estimator: Estimator) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.tau == tau && c.n == n && c.estimator == estimator)
    }

    pub fn quotient(&self, kind: QuotientKind, model: u8) -> Option<&Quotient> {
        self.quotients.iter().find(|q| q.kind == kind && q.model == model)
    }

    /// Hybrid replicates that broke the estimator contract.
    pub fn contract_violations(&self) -> usize {
        self.cells
            .iter()
            .flat_map(|c| c.replicates.iter())
            .filter(|r| !r.contract_ok)
            .count()
    }
}

type CellKey = (u8, u64, usize, (u8, usize, u64));
type Outcome = Result<ReplicateResult, String>;

/// Runs every `(model, tau, n, estimator)` cell for `cfg.replicates`
/// replicates.
pub fn run_study(cfg: &StudyConfig) -> Result<ErrorReport, SimError> {
    run_study_with_progress(cfg, &|_, _| {})
}

/// As [`run_study`], calling `progress(done, total)` after each
/// `(model, n, replicate)` job.
///
/// A job draws one sample and runs every `tau` and estimator on it: hybrid
/// estimates with different `B`, `p` and `tau` share the sample's bootstrap
/// replicates, and the two plug-in rows share nothing but the sample. Failures
/// are recorded per replicate and never stop the study.
pub fn run_study_with_progress(cfg: &StudyConfig, progress: &(dyn Fn(usize, usize) + Sync)) -> Result<ErrorReport, SimError> {
    cfg.validate()?;
    let models: Vec<MixtureModel> = cfg.models.iter().map(|&m| MixtureModel::catalog(m).expect("validated")).collect();
    let grid = cfg.truth_grid.unwrap_or_else(default_truth_grid);
    let mut truths: BTreeMap<(u8, u64), TrueHdr> = BTreeMap::new();
    for m in &models {
        for &tau in &cfg.taus {
            let s = seed::derive_path(cfg.seed, &[0x7472_7574, m.id as u64, tau.to_bits()]);
            truths.insert((m.id, tau.to_bits()), true_hdr(m, tau, &grid, cfg.truth_draws, s)?);
        }
    }
    let jobs: Vec<(usize, usize, usize)> = (0..models.len())
        .flat_map(|mi| cfg.ns.iter().flat_map(move |&n| (0..cfg.replicates).map(move |r| (mi, n, r))))
        .collect();
    let total = jobs.len();
    let done = core::sync::atomic::AtomicUsize::new(0);
    let run = |&(mi, n, rep): &(usize, usize, usize)| {
        let out = run_job(cfg, &models[mi], n, rep, &truths);
        let d = done.fetch_add(1, core::sync::atomic::Ordering::Relaxed) + 1;
        progress(d, total);
        out
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Vec<(CellKey, Outcome)>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Vec<(CellKey, Outcome)>> = jobs.iter().map(run).collect();

    let mut grouped: BTreeMap<CellKey, Vec<Outcome>> = BTreeMap::new();
    for (key, outcome) in results.into_iter().flatten() {
        grouped.entry(key).or_default().push(outcome);
    }
    let estimators = cfg.estimators();
    let mut cells = Vec::new();
    for m in &models {
        for &tau in &cfg.taus {
            for &n in &cfg.ns {
                for est in &estimators {
                    let key = (m.id, tau.to_bits(), n, est.order());
                    let outcomes = grouped.remove(&key).unwrap_or_default();
                    cells.push(summarize(m.id, tau, n, *est, outcomes));
                }
            }
        }
    }
    let mut report = ErrorReport {
        config: cfg.clone(),
        models: models.iter().map(MixtureModel::describe).collect(),
        truth_levels: truths.values().map(|t| (t.model().id, t.tau, t.level, t.level_std_error)).collect(),
        cells,
        quotients: Vec::new(),
    };
    report.quotients = quotients(&report);
    Ok(report)
}

fn summarize(model: u8, tau: f64, n: usize, estimator: Estimator, outcomes: Vec<Outcome>) -> CellReport {
    let mut replicates = Vec::new();
    let mut failures = Vec::new();
    for (rep, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => replicates.push(r),
            Err(cause) => failures.push((rep, cause)),
        }
    }
    let h: Vec<f64> = replicates.iter().map(|r| r.hausdorff).collect();
    let d: Vec<f64> = replicates.iter().map(|r| r.measure).collect();
    let mut flags = Vec::new();
    if replicates.len() == 1 {
        flags.push(CellFlag::SingleReplicate);
    }
    if replicates.is_empty() {
        let cause = failures.first().map(|f| f.1.clone()).unwrap_or_else(|| "no replicates".to_string());
        flags.push(CellFlag::Failed { cause });
    } else if !failures.is_empty() {
        flags.push(CellFlag::PartialFailure { failed: failures.len() });
    }
    let not_converged = replicates.iter().filter(|r| !r.converged).count();
    if not_converged > 0 {
        flags.push(CellFlag::NotConverged { count: not_converged });
    }
    let broken = replicates.iter().filter(|r| !r.contract_ok).count();
    if broken > 0 {
        flags.push(CellFlag::ContractViolation { count: broken });
    }
    CellReport {
        model,
        tau,
        n,
        estimator,
        hausdorff: Summary::of(&h),
        measure: Summary::of(&d),
        replicates,
        failures,
        flags,
    }
}

fn run_job(cfg: &StudyConfig, model: &MixtureModel, n: usize, rep: usize, truths: &BTreeMap<(u8, u64), TrueHdr>) -> Vec<(CellKey, Outcome)> {
    let sample_seed = cfg.sample_seed(model.id, n, rep);
    let sample = model.sample(n, sample_seed);
    let estimators = cfg.estimators();
    let h1 = BandwidthSelector::Plugin.select(&sample).map_err(|e| e.to_string());
    let needs_h2 = estimators.contains(&Estimator::PluginH2);
    let h2 = if needs_h2 {
        BandwidthSelector::Lscv.select(&sample).map_err(|e| e.to_string())
    } else {
        Err(String::new())
    };
    let bank_seed = seed::derive(sample_seed, 1);
    let mut bank = h1
        .as_ref()
        .ok()
        .map(|&h| BootstrapBank::new(bank_seed, h, BootstrapDensity::Refit, false));
    let mut out = Vec::new();
    for (ti, &tau) in cfg.taus.iter().enumerate() {
        let truth = &truths[&(model.id, tau.to_bits())];
        let mc_seed = seed::derive_path(sample_seed, &[2, ti as u64]);
        for est in &estimators {
            let key = (model.id, tau.to_bits(), n, est.order());
            let outcome = estimate(cfg, &sample, tau, *est, &h1, &h2, bank.as_mut(), bank_seed)
                .map(|(e, contract_ok)| errors(cfg, &e, truth, rep, mc_seed, contract_ok));
            out.push((key, outcome));
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    cfg: &StudyConfig,
    sample: &PointSet,
    tau: f64,
    est: Estimator,
    h1: &Result<BandwidthMatrix, String>,
    h2: &Result<BandwidthMatrix, String>,
    bank: Option<&mut BootstrapBank>,
    bank_seed: u64,
) -> Result<(HdrEstimate, bool), String> {
    let plugin = |h: &Result<BandwidthMatrix, String>| -> Result<(HdrEstimate, bool), String> {
        let h = h.clone()?;
        let pc = PluginConfig {
            resolution: cfg.plugin_resolution,
            ..PluginConfig::new(tau)
        };
        plugin_hdr_with_bandwidth(sample, &pc, h).map(|e| (e, true)).map_err(|e| e.to_string())
    };
    match est {
        Estimator::PluginH1 => plugin(h1),
        Estimator::PluginH2 => plugin(h2),
        Estimator::Hybrid { bootstrap, p } => {
            let bank = bank.ok_or_else(|| h1.clone().err().unwrap_or_default())?;
            let hc = HybridConfig {
                tau,
                bootstrap,
                p,
                step: cfg.step,
                nu: cfg.nu,
                seed: bank_seed,
                ..HybridConfig::default()
            };
            let e = hybrid_hdr_with_bank(sample, &hc, bank).map_err(|e| e.to_string())?;
            let ok = verify_hybrid_contract(sample, &e, cfg.step).is_ok();
            Ok((e, ok))
        }
    }
}

fn errors(cfg: &StudyConfig, est: &HdrEstimate, truth: &TrueHdr, rep: usize, mc_seed: u64, contract_ok: bool) -> ReplicateResult {
    let hausdorff = boundary_hausdorff(&est.region, truth, cfg.boundary_spacing);
    let m = distance_in_measure(&est.region, truth, cfg.region_box, cfg.mc_samples, mc_seed);
    ReplicateResult {
        replicate: rep,
        hausdorff,
        measure: m.value,
        measure_std_error: m.std_error,
        components: est.components,
        coverage: est.coverage,
        converged: est.converged,
        tau_bar: est.tau_bar,
        contract_ok,
    }
}

fn quotients(report: &ErrorReport) -> Vec<Quotient> {
    let cfg = &report.config;
    let p = cfg.reference_p;
    let hybrid = |bootstrap| Estimator::Hybrid { bootstrap, p };
    let mut out = Vec::new();
    let mut push = |kind, model, tau, n, bootstrap, num: Option<&CellReport>, den: Option<&CellReport>| {
        if let (Some(a), Some(b)) = (num, den) {
            if a.hausdorff.count > 0 && b.hausdorff.count > 0 {
                out.push(Quotient {
                    kind,
                    model,
                    tau,
                    n,
                    bootstrap,
                    hausdorff: a.hausdorff.mean / b.hausdorff.mean,
                    measure: a.measure.mean / b.measure.mean,
                });
            }
        }
    };
    for &model in &cfg.models {
        push(QuotientKind::Q1, model, 0.5, 500, 100, report.cell(model, 0.5, 500, hybrid(100)), report.cell(model, 0.5, 1000, hybrid(100)));
        push(QuotientKind::Q2, model, 0.8, 500, 250, report.cell(model, 0.8, 500, hybrid(250)), report.cell(model, 0.8, 1000, hybrid(250)));
        push(QuotientKind::Q3, model, 0.5, 500, 100, report.cell(model, 0.5, 500, hybrid(100)), report.cell(model, 0.5, 500, hybrid(250)));
        for &tau in &cfg.taus {
            for &n in &cfg.ns {
                for &b in &cfg.bootstraps {
                    let num = report.cell(model, tau, n, hybrid(b));
                    push(QuotientKind::HybridOverH1, model, tau, n, b, num, report.cell(model, tau, n, Estimator::PluginH1));
                    push(QuotientKind::HybridOverH2, model, tau, n, b, num, report.cell(model, tau, n, Estimator::PluginH2));
                }
            }
        }
    }
    out
}
