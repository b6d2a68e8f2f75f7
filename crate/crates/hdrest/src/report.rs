//! Tables and a plain-text report of a benchmark study.

use std::fmt::Write as _;
use std::path::Path;

use hdrest_core::simbench::{CellFlag, ErrorReport, Estimator, QuotientKind};
use serde::Serialize;

use crate::export::{write_csv, write_json};
use crate::AppError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRow {
    pub model: u8,
    pub tau: f64,
    pub n: usize,
    pub estimator: String,
    pub bootstrap: Option<usize>,
    pub p: Option<f64>,
    pub hausdorff_mean: f64,
    pub hausdorff_sd: f64,
    pub measure_mean: f64,
    pub measure_sd: f64,
    pub replicates: usize,
    pub failures: usize,
    pub flags: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRow {
    pub model: u8,
    pub tau: f64,
    pub n: usize,
    pub estimator: String,
    pub replicate: usize,
    pub hausdorff: f64,
    pub measure: f64,
    pub measure_std_error: f64,
    pub components: usize,
    pub coverage: f64,
    pub tau_bar: f64,
    pub converged: bool,
    pub contract_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientRow {
    pub kind: String,
    pub model: u8,
    pub tau: f64,
    pub n: usize,
    pub bootstrap: usize,
    pub hausdorff: f64,
    pub measure: f64,
}

fn kind_name(k: QuotientKind) -> &'static str {
    match k {
        QuotientKind::Q1 => "q1",
        QuotientKind::Q2 => "q2",
        QuotientKind::Q3 => "q3",
        QuotientKind::HybridOverH1 => "hybrid/h1",
        QuotientKind::HybridOverH2 => "hybrid/h2",
    }
}

fn flag_text(f: &CellFlag) -> String {
    match f {
        CellFlag::SingleReplicate => "single-replicate".into(),
        CellFlag::PartialFailure { failed } => format!("failed:{failed}"),
        CellFlag::Failed { cause } => format!("all-failed:{cause}"),
        CellFlag::NotConverged { count } => format!("not-converged:{count}"),
        CellFlag::ContractViolation { count } => format!("contract-violation:{count}"),
    }
}

fn estimator_parts(e: &Estimator) -> (String, Option<usize>, Option<f64>) {
    match e {
        Estimator::Hybrid { bootstrap, p } => ("hybrid".into(), Some(*bootstrap), Some(*p)),
        Estimator::PluginH1 => ("plugin_h1".into(), None, None),
        Estimator::PluginH2 => ("plugin_h2".into(), None, None),
    }
}

pub fn cell_rows(report: &ErrorReport) -> Vec<CellRow> {
    report
        .cells
        .iter()
        .map(|c| {
            let (estimator, bootstrap, p) = estimator_parts(&c.estimator);
            CellRow {
                model: c.model,
                tau: c.tau,
                n: c.n,
                estimator,
                bootstrap,
                p,
                hausdorff_mean: c.hausdorff.mean,
                hausdorff_sd: c.hausdorff.sd,
                measure_mean: c.measure.mean,
                measure_sd: c.measure.sd,
                replicates: c.replicates.len(),
                failures: c.failures.len(),
                flags: c.flags.iter().map(flag_text).collect::<Vec<_>>().join(";"),
            }
        })
        .collect()
}

pub fn replicate_rows(report: &ErrorReport) -> Vec<ReplicateRow> {
    let mut rows = Vec::new();
    for c in &report.cells {
        for r in &c.replicates {
            rows.push(ReplicateRow {
                model: c.model,
                tau: c.tau,
                n: c.n,
                estimator: c.estimator.label(),
                replicate: r.replicate,
                hausdorff: r.hausdorff,
                measure: r.measure,
                measure_std_error: r.measure_std_error,
                components: r.components,
                coverage: r.coverage,
                tau_bar: r.tau_bar,
                converged: r.converged,
                contract_ok: r.contract_ok,
            });
        }
    }
    rows
}

pub fn quotient_rows(report: &ErrorReport) -> Vec<QuotientRow> {
    report
        .quotients
        .iter()
        .map(|q| QuotientRow {
            kind: kind_name(q.kind).into(),
            model: q.model,
            tau: q.tau,
            n: q.n,
            bootstrap: q.bootstrap,
            hausdorff: q.hausdorff,
            measure: q.measure,
        })
        .collect()
}

/// Human-readable summary: model parameters, true levels, cell means and
/// the quotient tables.
pub fn render_text(report: &ErrorReport) -> String {
    let mut s = String::new();
    let cfg = &report.config;
    let _ = writeln!(
        s,
        "study: seed {}, {} replicates, taus {:?}, n {:?}, B {:?}, p {:?}, step {}, nu {}",
        cfg.seed, cfg.replicates, cfg.taus, cfg.ns, cfg.bootstraps, cfg.ps, cfg.step, cfg.nu
    );
    for m in &report.models {
        let _ = writeln!(s, "{m}");
    }
    let _ = writeln!(s, "\ntrue levels");
    for (m, tau, level, se) in &report.truth_levels {
        let _ = writeln!(s, "  model {m} tau {tau}: {level:.6} (se {se:.2e})");
    }
    let _ = writeln!(s, "\n{:>5} {:>5} {:>6}  {:<22} {:>9} {:>9} {:>9} {:>9}  flags", "model", "tau", "n", "estimator", "H mean", "H sd", "d_mu mean", "d_mu sd");
    for c in &report.cells {
        let flags = c.flags.iter().map(flag_text).collect::<Vec<_>>().join(" ");
        let _ = writeln!(
            s,
            "{:>5} {:>5} {:>6}  {:<22} {:>9.4} {:>9.4} {:>9.4} {:>9.4}  {flags}",
            c.model,
            c.tau,
            c.n,
            c.estimator.label(),
            c.hausdorff.mean,
            c.hausdorff.sd,
            c.measure.mean,
            c.measure.sd
        );
    }
    let _ = writeln!(s, "\n{:<10} {:>5} {:>5} {:>6} {:>5} {:>9} {:>9}", "quotient", "model", "tau", "n", "B", "H", "d_mu");
    for q in &report.quotients {
        let _ = writeln!(
            s,
            "{:<10} {:>5} {:>5} {:>6} {:>5} {:>9.4} {:>9.4}",
            kind_name(q.kind),
            q.model,
            q.tau,
            q.n,
            q.bootstrap,
            q.hausdorff,
            q.measure
        );
    }
    let _ = writeln!(s, "\ncontract violations: {}", report.contract_violations());
    s
}

/// `cells.csv`, `replicates.csv`, `quotients.csv`, `report.txt` and
/// `report.json` under `dir`.
pub fn write_study(dir: &Path, report: &ErrorReport) -> Result<Vec<String>, AppError> {
    write_csv(&dir.join("cells.csv"), &cell_rows(report))?;
    write_csv(&dir.join("replicates.csv"), &replicate_rows(report))?;
    write_csv(&dir.join("quotients.csv"), &quotient_rows(report))?;
    crate::export::write_atomic(&dir.join("report.txt"), render_text(report).as_bytes())?;
    write_json(&dir.join("report.json"), report)?;
    Ok(["cells.csv", "replicates.csv", "quotients.csv", "report.txt", "report.json"]
        .map(String::from)
        .to_vec())
}
