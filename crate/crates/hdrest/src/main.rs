use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use hdrest_core::density::BandwidthSelector;
use hdrest_core::hdr::{BootstrapDensity, HdrError, HybridConfig};
use hdrest_core::metrics::{boundary_hausdorff, distance_in_measure, Rect, DEFAULT_BOUNDARY_SPACING, DEFAULT_MC_SAMPLES};
use hdrest_core::simbench::{run_study_with_progress, SimError, StudyConfig};
use hdrest_core::PointSet;
use serde_json::json;

use hdrest::export::{write_csv, write_json};
use hdrest::geojson::{feature_collection, estimate_feature, read_polygons, GeoJsonOptions};
use hdrest::ingest::{ingest_csv, read_points_csv, IngestConfig, Schema};
use hdrest::pipeline::{estimate_sample, run_pipeline, EstimationConfig, MethodChoice, PipelineConfig};
use hdrest::report::{render_text, write_study};
use hdrest::AppError;

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

/// Highest density regions of planar point samples.
#[derive(Parser, Debug)]
#[command(name = "hdrest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the HDRs of one point sample.
    Estimate(EstimateArgs),
    /// Weekly HDRs of case data.
    Pipeline(PipelineArgs),
    /// Run the simulation benchmark.
    Bench(BenchArgs),
    /// Compare two regions stored as GeoJSON polygons.
    Metrics(MetricsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SelectorArg {
    Plugin,
    Lscv,
    NormalScale,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DensityArg {
    Refit,
    Original,
}

#[derive(Args, Debug)]
struct EstimationArgs {
    #[arg(long, value_enum, default_value_t = MethodChoice::Both)]
    method: MethodChoice,
    /// Probability outside the region; repeat or comma-separate for several.
    #[arg(long = "tau", value_delimiter = ',', default_values_t = [0.9, 0.8, 0.5])]
    taus: Vec<f64>,
    /// Bootstrap resamples per iteration.
    #[arg(long, default_value_t = 250)]
    bootstrap: usize,
    /// Quantile level of the bootstrap proportions.
    #[arg(long, default_value_t = 0.25)]
    p: f64,
    #[arg(long, default_value_t = 0.025)]
    step: f64,
    /// Hull radius as a fraction of the separating radius.
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, value_enum, default_value_t = SelectorArg::Plugin)]
    selector: SelectorArg,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long, value_enum, default_value_t = DensityArg::Refit)]
    bootstrap_density: DensityArg,
    /// Evaluate bootstrap densities by direct summation.
    #[arg(long)]
    exact_bootstrap: bool,
    #[arg(long)]
    r0_tol: Option<f64>,
    /// Plug-in contour grid resolution per axis.
    #[arg(long, default_value_t = 256)]
    plugin_resolution: usize,
}

impl EstimationArgs {
    fn config(&self) -> EstimationConfig {
        EstimationConfig {
            method: self.method,
            taus: self.taus.clone(),
            hybrid: HybridConfig {
                tau: self.taus.first().copied().unwrap_or(0.5),
                bootstrap: self.bootstrap,
                p: self.p,
                step: self.step,
                nu: self.nu,
                seed: 0,
                selector: match self.selector {
                    SelectorArg::Plugin => BandwidthSelector::Plugin,
                    SelectorArg::Lscv => BandwidthSelector::Lscv,
                    SelectorArg::NormalScale => BandwidthSelector::NormalScale,
                },
                max_iterations: self.max_iterations,
                bootstrap_density: match self.bootstrap_density {
                    DensityArg::Refit => BootstrapDensity::Refit,
                    DensityArg::Original => BootstrapDensity::Original,
                },
                exact_bootstrap: self.exact_bootstrap,
                r0_tol: self.r0_tol,
            },
            plugin_resolution: self.plugin_resolution,
        }
    }
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// CSV with a header.
    input: PathBuf,
    #[arg(long, default_value = "x")]
    x_column: String,
    #[arg(long, default_value = "y")]
    y_column: String,
    #[command(flatten)]
    estimation: EstimationArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    arc_tolerance: f64,
    /// Output directory; without it a summary is printed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Case CSV with a header.
    input: PathBuf,
    #[arg(long, default_value = "longitude")]
    lon_column: String,
    #[arg(long, default_value = "latitude")]
    lat_column: String,
    #[arg(long, default_value = "date")]
    date_column: String,
    #[arg(long, default_value = "count")]
    count_column: String,
    /// Every row is one case.
    #[arg(long)]
    no_count: bool,
    #[arg(long, default_value = "%Y-%m-%d")]
    date_format: String,
    /// Counts are running totals per location.
    #[arg(long)]
    cumulative: bool,
    /// First day of week 0; defaults to the earliest record.
    #[arg(long)]
    start: Option<NaiveDate>,
    /// Jitter standard deviation in degrees.
    #[arg(long, default_value_t = 0.01)]
    jitter: f64,
    /// Scale longitudes by the cosine of the mean latitude.
    #[arg(long)]
    equirectangular: bool,
    #[arg(long, default_value_t = 50)]
    n_min: usize,
    #[command(flatten)]
    estimation: EstimationArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    arc_tolerance: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, required = true)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = (1u8..=9).collect::<Vec<_>>())]
    models: Vec<u8>,
    #[arg(long = "tau", value_delimiter = ',', default_values_t = [0.5, 0.8])]
    taus: Vec<f64>,
    #[arg(long = "n", value_delimiter = ',', default_values_t = [500, 1000])]
    ns: Vec<usize>,
    #[arg(long = "bootstrap", value_delimiter = ',', default_values_t = [100, 250])]
    bootstraps: Vec<usize>,
    #[arg(long = "p", value_delimiter = ',', default_values_t = hdrest_core::simbench::P_LEVELS)]
    ps: Vec<f64>,
    #[arg(long, default_value_t = 0.025)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 50)]
    replicates: usize,
    /// `p` of the hybrid rows used in the quotient tables.
    #[arg(long, default_value_t = hdrest_core::simbench::P_LEVELS[2])]
    reference_p: f64,
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    mc_samples: usize,
    #[arg(long, default_value_t = hdrest_core::simbench::DEFAULT_TRUTH_DRAWS)]
    truth_draws: usize,
    #[arg(long, default_value_t = DEFAULT_BOUNDARY_SPACING)]
    boundary_spacing: f64,
    /// Skip the plug-in estimator with the plug-in bandwidth.
    #[arg(long)]
    no_h1: bool,
    /// Skip the plug-in estimator with the cross-validation bandwidth.
    #[arg(long)]
    no_h2: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    first: PathBuf,
    second: PathBuf,
    /// Feature index in the first file; all features by default.
    #[arg(long)]
    first_feature: Option<usize>,
    #[arg(long)]
    second_feature: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BOUNDARY_SPACING)]
    spacing: f64,
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo box `x_min,x_max,y_min,y_max`; defaults to both regions' bounds padded by 5%.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bbox: Option<Vec<f64>>,
}

fn open(path: &Path) -> Result<BufReader<File>, AppError> {
    File::open(path).map(BufReader::new).map_err(|e| AppError::io(path, e))
}

fn exit_code(e: &AppError) -> u8 {
    match e {
        AppError::MalformedHeader(_) | AppError::Validation(_) => EXIT_VALIDATION,
        AppError::Hdr(HdrError::InvalidTau(_) | HdrError::InvalidConfig(_)) => EXIT_VALIDATION,
        AppError::Sim(SimError::InvalidConfig(_) | SimError::InvalidTau(_) | SimError::UnknownModel(_)) => EXIT_VALIDATION,
        _ => EXIT_FAILURE,
    }
}

fn estimate(args: &EstimateArgs) -> Result<u8, AppError> {
    let cfg = args.estimation.config();
    cfg.validate()?;
    let points = read_points_csv(open(&args.input)?, &args.x_column, &args.y_column)?;
    let points = PointSet::new(points).map_err(|e| AppError::Validation(e.to_string()))?;
    let results = estimate_sample(&points, &cfg, args.seed)?;
    let opts = GeoJsonOptions {
        arc_tolerance: args.arc_tolerance,
        x_scale: 1.0,
    };
    let (mut ok, mut failed) = (Vec::new(), Vec::new());
    for r in results {
        match r {
            Ok(e) => ok.push(e),
            Err(f) => {
                eprintln!("{} tau={}: {}", f.method, f.tau, f.error);
                failed.push(f);
            }
        }
    }
    let rows: Vec<_> = ok.iter().map(|e| e.row(None, points.len())).collect();
    if let Some(dir) = &args.out {
        write_json(
            &dir.join("estimate.json"),
            &json!({
                "input": args.input,
                "n": points.len(),
                "seed": args.seed,
                "config": cfg,
                "estimates": ok.iter().map(|e| e.record()).collect::<Vec<_>>(),
                "failures": failed,
            }),
        )?;
        write_json(
            &dir.join("estimate.geojson"),
            &feature_collection(ok.iter().map(|e| estimate_feature(&e.estimate, &opts, None)).collect()),
        )?;
        write_csv(&dir.join("summary.csv"), &rows)?;
    }
    for r in &rows {
        println!(
            "{:<6} tau={:<4} components={} coverage={:.4} tau_bar={:.4} converged={}",
            r.method, r.tau, r.components, r.coverage, r.tau_bar, r.converged
        );
    }
    Ok(if !failed.is_empty() {
        EXIT_FAILURE
    } else if rows.iter().any(|r| !r.converged) {
        EXIT_NOT_CONVERGED
    } else {
        0
    })
}

fn pipeline(args: &PipelineArgs) -> Result<u8, AppError> {
    let ingest_cfg = IngestConfig {
        schema: Schema {
            longitude: args.lon_column.clone(),
            latitude: args.lat_column.clone(),
            date: args.date_column.clone(),
            count: (!args.no_count).then(|| args.count_column.clone()),
            date_format: args.date_format.clone(),
        },
        jitter_sigma: args.jitter,
        seed: args.seed,
        cumulative: args.cumulative,
        start: args.start,
        n_min: args.n_min,
        equirectangular: args.equirectangular,
    };
    let cfg = PipelineConfig {
        estimation: args.estimation.config(),
        seed: args.seed,
        n_min: args.n_min,
        arc_tolerance: args.arc_tolerance,
        output_dir: Some(args.out.clone()),
    };
    cfg.estimation.validate()?;
    let ingest = ingest_csv(open(&args.input)?, &ingest_cfg)?;
    for e in &ingest.errors {
        eprintln!("row {}: {}", e.row, e.message);
    }
    for b in &ingest.batches {
        eprintln!(
            "week {} ({} to {}): {} records, {} points{}",
            b.week,
            b.start,
            b.end,
            b.records,
            b.points.len(),
            if b.unreliable { ", unreliable" } else { "" }
        );
    }
    let out = run_pipeline(&ingest, &cfg)?;
    for w in &out.weeks {
        match &w.status {
            hdrest::pipeline::WeekStatus::Skipped { reason } => eprintln!("week {} skipped: {reason}", w.week),
            hdrest::pipeline::WeekStatus::Failed { error } => eprintln!("week {} failed: {error}", w.week),
            hdrest::pipeline::WeekStatus::Estimated => {}
        }
        for f in &w.failures {
            eprintln!("week {} {} tau={}: {}", w.week, f.method, f.tau, f.error);
        }
    }
    println!("week,{}", out.cluster_columns.join(","));
    for (w, _, _, cells) in &out.cluster_rows {
        let cells: Vec<String> = cells.iter().map(|c| c.map_or("-".into(), |k| k.to_string())).collect();
        println!("{w},{}", cells.join(","));
    }
    Ok(if out.any_not_converged() { EXIT_NOT_CONVERGED } else { 0 })
}

fn bench(args: &BenchArgs) -> Result<u8, AppError> {
    let cfg = StudyConfig {
        models: args.models.clone(),
        taus: args.taus.clone(),
        ns: args.ns.clone(),
        bootstraps: args.bootstraps.clone(),
        ps: args.ps.clone(),
        step: args.step,
        nu: args.nu,
        replicates: args.replicates,
        seed: args.seed,
        plugin_h1: !args.no_h1,
        plugin_h2: !args.no_h2,
        reference_p: args.reference_p,
        boundary_spacing: args.boundary_spacing,
        mc_samples: args.mc_samples,
        truth_draws: args.truth_draws,
        ..StudyConfig::default()
    };
    cfg.validate()?;
    let last = AtomicUsize::new(0);
    let report = run_study_with_progress(&cfg, &|done, total| {
        let pct = done * 100 / total.max(1);
        if pct >= last.load(Ordering::Relaxed) + 5 || done == total {
            last.store(pct, Ordering::Relaxed);
            eprintln!("{done}/{total} jobs");
        }
    })?;
    let files = write_study(&args.out, &report)?;
    write_json(&args.out.join("manifest.json"), &json!({"config": cfg, "files": files}))?;
    print!("{}", render_text(&report));
    let not_converged = report.cells.iter().flat_map(|c| &c.replicates).any(|r| !r.converged);
    Ok(if not_converged { EXIT_NOT_CONVERGED } else { 0 })
}

fn metrics(args: &MetricsArgs) -> Result<u8, AppError> {
    let read = |path: &Path, feature| -> Result<_, AppError> {
        let doc: serde_json::Value = serde_json::from_reader(open(path)?)?;
        read_polygons(&doc, feature)
    };
    let a = read(&args.first, args.first_feature)?;
    let c = read(&args.second, args.second_feature)?;
    let bbox = match args.bbox.as_deref() {
        Some(&[x_min, x_max, y_min, y_max]) => Rect::new(x_min, x_max, y_min, y_max),
        Some(_) => return Err(AppError::Validation("--bbox takes four values x_min,x_max,y_min,y_max".into())),
        None => {
            let pts: Vec<_> = a.rings().iter().chain(c.rings()).flat_map(|r| r.points.iter().copied()).collect();
            let raw = Rect::around(&pts, 0.0).ok_or_else(|| AppError::Validation("both regions are empty".into()))?;
            let pad = 0.05 * (raw.x_max - raw.x_min).max(raw.y_max - raw.y_min);
            Rect::around(&pts, pad).expect("nonempty")
        }
    };
    if !(bbox.area() > 0.0) || !(args.spacing > 0.0) {
        return Err(AppError::Validation("box area and spacing must be positive".into()));
    }
    let h = boundary_hausdorff(&a, &c, args.spacing);
    let m = distance_in_measure(&a, &c, bbox, args.mc_samples, args.seed);
    let out = json!({
        "hausdorff": if h.is_finite() { json!(h) } else { serde_json::Value::Null },
        "distance_in_measure": m.value,
        "std_error": m.std_error,
        "samples": m.samples,
        "bbox": [bbox.x_min, bbox.x_max, bbox.y_min, bbox.y_max],
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Bench(a) => bench(a),
        Command::Metrics(a) => metrics(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
