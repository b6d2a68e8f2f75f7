//! Estimation of one sample or of every weekly batch, with per-week artifacts.

use std::path::PathBuf;
use std::time::Instant;

use chrono::NaiveDate;
use hdrest_core::density::BandwidthMatrix;
use hdrest_core::hdr::{
    hybrid_hdr_with_bank, plugin_hdr_with_bandwidth, BootstrapBank, HdrEstimate, HybridConfig, IterationRecord, Method,
    PluginConfig, Thresholds,
};
use hdrest_core::{seed, PointSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::export::{write_csv, write_json, write_table};
use crate::geojson::{estimate_feature, feature_collection, GeoJsonOptions};
use crate::ingest::{IngestReport, WeeklyBatch};
use crate::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Hybrid,
    Plugin,
    #[default]
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodChoice::Hybrid => vec![Method::Hybrid],
            MethodChoice::Plugin => vec![Method::Plugin],
            MethodChoice::Both => vec![Method::Hybrid, Method::Plugin],
        }
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Hybrid => "hybrid",
        Method::Plugin => "plugin",
    }
}

/// What to estimate on a sample. `hybrid.tau` and `hybrid.seed` are replaced
/// per run; the plug-in estimator uses the hybrid's bandwidth selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub method: MethodChoice,
    pub taus: Vec<f64>,
    pub hybrid: HybridConfig,
    pub plugin_resolution: usize,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            method: MethodChoice::Both,
            taus: vec![0.9, 0.8, 0.5],
            hybrid: HybridConfig::default(),
            plugin_resolution: 256,
        }
    }
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<(), AppError> {
        if self.taus.is_empty() {
            return Err(AppError::Validation("at least one tau is needed".into()));
        }
        for &tau in &self.taus {
            HybridConfig { tau, ..self.hybrid }.validate()?;
        }
        if self.plugin_resolution < 8 {
            return Err(AppError::Validation("plug-in resolution must be at least 8".into()));
        }
        Ok(())
    }
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub week: Option<usize>,
    pub week_start: Option<NaiveDate>,
    pub n: usize,
    pub method: String,
    pub tau: f64,
    pub components: usize,
    pub coverage: f64,
    pub tau_bar: f64,
    pub level: f64,
    /// Hull radius; empty for the plug-in estimator and for the convex hull.
    pub radius: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub runtime_ms: f64,
}

/// Full record of one estimate, for the JSON artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub method: String,
    pub tau: f64,
    pub tau_bar: f64,
    pub coverage: f64,
    pub components: usize,
    pub converged: bool,
    pub thresholds: Thresholds,
    pub radius: Option<f64>,
    pub convex_hull: bool,
    pub dn: Option<f64>,
    pub bandwidth: BandwidthMatrix,
    pub trace: Vec<IterationRecord>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Estimated {
    pub estimate: HdrEstimate,
    pub runtime_ms: f64,
}

impl Estimated {
    pub fn row(&self, week: Option<&WeeklyBatch>, n: usize) -> SummaryRow {
        let e = &self.estimate;
        SummaryRow {
            week: week.map(|b| b.week),
            week_start: week.map(|b| b.start),
            n,
            method: method_name(e.method).into(),
            tau: e.tau,
            components: e.components,
            coverage: e.coverage,
            tau_bar: e.tau_bar,
            level: e.thresholds.level,
            radius: e.radius.filter(|r| r.is_finite()),
            iterations: e.trace.len(),
            converged: e.converged,
            runtime_ms: self.runtime_ms,
        }
    }

    pub fn record(&self) -> EstimateRecord {
        let e = &self.estimate;
        EstimateRecord {
            method: method_name(e.method).into(),
            tau: e.tau,
            tau_bar: e.tau_bar,
            coverage: e.coverage,
            components: e.components,
            converged: e.converged,
            thresholds: e.thresholds,
            radius: e.radius.filter(|r| r.is_finite()),
            convex_hull: e.radius.is_some_and(f64::is_infinite),
            dn: e.dn,
            bandwidth: e.bandwidth,
            trace: e.trace.clone(),
            runtime_ms: self.runtime_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateFailure {
    pub method: String,
    pub tau: f64,
    pub error: String,
}

/// Every requested (tau, method) estimate on one sample, in the order of
/// `cfg.taus` with the hybrid before the plug-in.
///
/// The bandwidth is selected once and the hybrid runs share one bootstrap bank.
pub fn estimate_sample(points: &PointSet, cfg: &EstimationConfig, seed: u64) -> Result<Vec<Result<Estimated, EstimateFailure>>, AppError> {
    cfg.validate()?;
    let h = cfg.hybrid.selector.select(points).map_err(hdrest_core::hdr::HdrError::from)?;
    let base = HybridConfig { seed, ..cfg.hybrid };
    let mut bank = BootstrapBank::for_config(&base, h);
    let mut out = Vec::new();
    for &tau in &cfg.taus {
        for m in cfg.method.methods() {
            let t0 = Instant::now();
            let res = match m {
                Method::Hybrid => hybrid_hdr_with_bank(points, &HybridConfig { tau, ..base }, &mut bank),
                Method::Plugin => {
                    let pc = PluginConfig {
                        tau,
                        selector: cfg.hybrid.selector,
                        resolution: cfg.plugin_resolution,
                        ..PluginConfig::default()
                    };
                    plugin_hdr_with_bandwidth(points, &pc, h)
                }
            };
            let runtime_ms = t0.elapsed().as_secs_f64() * 1e3;
            out.push(res.map(|estimate| Estimated { estimate, runtime_ms }).map_err(|e| EstimateFailure {
                method: method_name(m).into(),
                tau,
                error: e.to_string(),
            }));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub estimation: EstimationConfig,
    pub seed: u64,
    /// Weeks with fewer points are skipped.
    pub n_min: usize,
    pub arc_tolerance: f64,
    /// Per-week GeoJSON and JSON files and the summary tables go here.
    pub output_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            estimation: EstimationConfig::default(),
            seed: 0,
            n_min: 50,
            arc_tolerance: 1e-3,
            output_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum WeekStatus {
    Estimated,
    Skipped { reason: String },
    Failed { error: String },
}

#[derive(Debug, Clone)]
pub struct WeekResult {
    pub week: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub n: usize,
    pub status: WeekStatus,
    pub estimates: Vec<Estimated>,
    pub failures: Vec<EstimateFailure>,
    pub geojson: Option<serde_json::Value>,
}

impl WeekResult {
    pub fn estimate(&self, method: Method, tau: f64) -> Option<&Estimated> {
        self.estimates
            .iter()
            .find(|e| e.estimate.method == method && (e.estimate.tau - tau).abs() < 1e-12)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub weeks: Vec<WeekResult>,
    pub rows: Vec<SummaryRow>,
    /// Column labels of the cluster table, `method@tau`.
    pub cluster_columns: Vec<String>,
    /// Per week: index, start date, sample size and component count per column.
    pub cluster_rows: Vec<(usize, NaiveDate, usize, Vec<Option<usize>>)>,
}

impl PipelineOutput {
    pub fn any_not_converged(&self) -> bool {
        self.rows.iter().any(|r| !r.converged)
    }
}

#[derive(Serialize)]
struct WeekDocument<'a> {
    week: usize,
    start: NaiveDate,
    end: NaiveDate,
    n: usize,
    #[serde(flatten)]
    status: &'a WeekStatus,
    estimates: Vec<EstimateRecord>,
    failures: &'a [EstimateFailure],
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a PipelineConfig,
    start: Option<NaiveDate>,
    jitter_sigma: f64,
    x_scale: f64,
    row_errors: usize,
    weeks: Vec<serde_json::Value>,
    files: Vec<String>,
}

fn run_week(batch: &WeeklyBatch, cfg: &PipelineConfig, x_scale: f64) -> WeekResult {
    let mut result = WeekResult {
        week: batch.week,
        start: batch.start,
        end: batch.end,
        n: batch.points.len(),
        status: WeekStatus::Estimated,
        estimates: Vec::new(),
        failures: Vec::new(),
        geojson: None,
    };
    if batch.points.len() < cfg.n_min {
        result.status = WeekStatus::Skipped {
            reason: format!("{} points, fewer than the minimum {}", batch.points.len(), cfg.n_min),
        };
        return result;
    }
    let points = match PointSet::new(batch.points.clone()) {
        Ok(p) => p,
        Err(e) => {
            result.status = WeekStatus::Failed { error: e.to_string() };
            return result;
        }
    };
    match estimate_sample(&points, &cfg.estimation, seed::derive(cfg.seed, batch.week as u64)) {
        Ok(all) => {
            for r in all {
                match r {
                    Ok(e) => result.estimates.push(e),
                    Err(f) => result.failures.push(f),
                }
            }
        }
        Err(e) => result.status = WeekStatus::Failed { error: e.to_string() },
    }
    let opts = GeoJsonOptions {
        arc_tolerance: cfg.arc_tolerance,
        x_scale,
    };
    result.geojson = Some(feature_collection(
        result
            .estimates
            .iter()
            .map(|e| estimate_feature(&e.estimate, &opts, Some(batch.week)))
            .collect(),
    ));
    result
}

fn week_stem(week: usize) -> String {
    format!("week_{week:03}")
}

/// Estimates every batch. Weeks run in parallel; with an output directory each
/// estimated week gets `week_NNN.geojson` and `week_NNN.json`, and the run gets
/// `summary.csv`, `clusters.csv` and `manifest.json`.
pub fn run_pipeline(ingest: &IngestReport, cfg: &PipelineConfig) -> Result<PipelineOutput, AppError> {
    cfg.estimation.validate()?;
    if !(cfg.arc_tolerance > 0.0) {
        return Err(AppError::Validation("arc tolerance must be positive".into()));
    }
    let weeks: Vec<WeekResult> = ingest.batches.par_iter().map(|b| run_week(b, cfg, ingest.x_scale)).collect();

    let mut rows = Vec::new();
    for (w, b) in weeks.iter().zip(&ingest.batches) {
        rows.extend(w.estimates.iter().map(|e| e.row(Some(b), w.n)));
    }
    let methods = cfg.estimation.method.methods();
    let mut cluster_columns = Vec::new();
    for &tau in &cfg.estimation.taus {
        for &m in &methods {
            cluster_columns.push(format!("{}@{tau}", method_name(m)));
        }
    }
    let cluster_rows = weeks
        .iter()
        .map(|w| {
            let mut cells = Vec::new();
            for &tau in &cfg.estimation.taus {
                for &m in &methods {
                    cells.push(w.estimate(m, tau).map(|e| e.estimate.components));
                }
            }
            (w.week, w.start, w.n, cells)
        })
        .collect();
    let out = PipelineOutput {
        weeks,
        rows,
        cluster_columns,
        cluster_rows,
    };
    if let Some(dir) = &cfg.output_dir {
        write_outputs(dir, ingest, cfg, &out)?;
    }
    Ok(out)
}

fn write_outputs(dir: &std::path::Path, ingest: &IngestReport, cfg: &PipelineConfig, out: &PipelineOutput) -> Result<(), AppError> {
    let mut files = Vec::new();
    let mut weeks = Vec::new();
    for w in &out.weeks {
        weeks.push(serde_json::json!({
            "week": w.week,
            "start": w.start,
            "end": w.end,
            "n": w.n,
            "status": &w.status,
        }));
        if w.status != WeekStatus::Estimated {
            continue;
        }
        let stem = week_stem(w.week);
        if let Some(doc) = &w.geojson {
            write_json(&dir.join(format!("{stem}.geojson")), doc)?;
            files.push(format!("{stem}.geojson"));
        }
        let doc = WeekDocument {
            week: w.week,
            start: w.start,
            end: w.end,
            n: w.n,
            status: &w.status,
            estimates: w.estimates.iter().map(Estimated::record).collect(),
            failures: &w.failures,
        };
        write_json(&dir.join(format!("{stem}.json")), &doc)?;
        files.push(format!("{stem}.json"));
    }
    write_csv(&dir.join("summary.csv"), &out.rows)?;
    let mut headers: Vec<String> = vec!["week".into(), "start".into(), "n".into()];
    headers.extend(out.cluster_columns.iter().cloned());
    let table: Vec<Vec<String>> = out
        .cluster_rows
        .iter()
        .map(|(w, start, n, cells)| {
            let mut r = vec![w.to_string(), start.to_string(), n.to_string()];
            r.extend(cells.iter().map(|c| c.map_or(String::new(), |k| k.to_string())));
            r
        })
        .collect();
    write_table(&dir.join("clusters.csv"), &headers, &table)?;
    files.extend(["summary.csv".to_string(), "clusters.csv".to_string()]);
    let manifest = Manifest {
        config: cfg,
        start: ingest.start,
        jitter_sigma: ingest.jitter_sigma,
        x_scale: ingest.x_scale,
        row_errors: ingest.errors.len(),
        weeks,
        files,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    if !ingest.errors.is_empty() {
        write_csv(&dir.join("row_errors.csv"), &ingest.errors)?;
    }
    Ok(())
}
