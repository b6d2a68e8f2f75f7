mod common;

use hdrest::geojson::{read_polygons, region_polygons, GeoJsonOptions};
use hdrest::ingest::{ingest_csv, IngestConfig};
use hdrest::pipeline::{run_pipeline, EstimationConfig, MethodChoice, PipelineConfig, WeekStatus};
use hdrest_core::hdr::Method;
use hdrest_core::Point;

fn config(taus: Vec<f64>) -> PipelineConfig {
    PipelineConfig {
        estimation: EstimationConfig {
            method: MethodChoice::Both,
            taus,
            ..EstimationConfig::default()
        },
        seed: 11,
        ..PipelineConfig::default()
    }
}

#[test]
fn two_cities_give_two_clusters_every_week() {
    let (csv, totals) = common::two_city_csv(2, 5000, 3);
    let ingest = ingest_csv(
        csv.as_bytes(),
        &IngestConfig {
            seed: 5,
            ..IngestConfig::default()
        },
    )
    .unwrap();
    assert!(ingest.errors.is_empty());
    let sizes: Vec<u64> = ingest.batches.iter().map(|b| b.points.len() as u64).collect();
    assert_eq!(sizes, totals);

    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        output_dir: Some(dir.path().to_path_buf()),
        ..config(vec![0.8])
    };
    let out = run_pipeline(&ingest, &cfg).unwrap();
    for w in &out.weeks {
        assert_eq!(w.status, WeekStatus::Estimated);
        let hybrid = w.estimate(Method::Hybrid, 0.8).unwrap();
        let plugin = w.estimate(Method::Plugin, 0.8).unwrap();
        println!(
            "week {}: hybrid {} (coverage {:.3}, tau_bar {:.3}), plugin {} ({:.0} ms, {:.0} ms)",
            w.week,
            hybrid.estimate.components,
            hybrid.estimate.coverage,
            hybrid.estimate.tau_bar,
            plugin.estimate.components,
            hybrid.runtime_ms,
            plugin.runtime_ms
        );
        assert_eq!(hybrid.estimate.components, 2);
        assert_eq!(plugin.estimate.components, 2);
    }
    for f in ["week_000.geojson", "week_001.json", "summary.csv", "clusters.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let clusters = std::fs::read_to_string(dir.path().join("clusters.csv")).unwrap();
    assert_eq!(clusters.lines().count(), 3);
    assert!(clusters.lines().skip(1).all(|l| l.ends_with(",2,2")), "{clusters}");

    // every emitted vertex lies in the estimated region, up to the arc tolerance
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("week_000.geojson")).unwrap()).unwrap();
    let w = &out.weeks[0];
    for (i, e) in w.estimates.iter().enumerate() {
        let set = read_polygons(&doc, Some(i)).unwrap();
        let region = &e.estimate.region;
        for r in set.rings() {
            for &v in &r.points {
                let near = (0..16).any(|k| {
                    let t = k as f64 * std::f64::consts::PI / 8.0;
                    region.contains(v) || region.contains(Point::new(v.x + 1e-3 * t.cos(), v.y + 1e-3 * t.sin()))
                });
                assert!(near, "vertex {v:?} of {:?}", e.estimate.method);
            }
        }
        assert_eq!(region_polygons(region, &GeoJsonOptions::default()).len(), e.estimate.components);
    }
}

#[test]
fn small_weeks_are_skipped_and_runs_repeat() {
    let mut csv = common::two_city_csv(1, 400, 8).0;
    csv.push_str("0.0,40.0,2020-03-10,5\n");
    let ingest = ingest_csv(csv.as_bytes(), &IngestConfig::default()).unwrap();
    assert_eq!(ingest.batches.len(), 2);
    assert!(ingest.batches[1].unreliable);
    let cfg = PipelineConfig {
        estimation: EstimationConfig {
            method: MethodChoice::Hybrid,
            taus: vec![0.5],
            hybrid: hdrest_core::hdr::HybridConfig {
                bootstrap: 40,
                ..Default::default()
            },
            ..EstimationConfig::default()
        },
        ..config(vec![0.5])
    };
    let a = run_pipeline(&ingest, &cfg).unwrap();
    assert!(matches!(a.weeks[1].status, WeekStatus::Skipped { .. }));
    assert!(a.weeks[1].estimates.is_empty());
    let b = run_pipeline(&ingest, &cfg).unwrap();
    assert_eq!(a.rows.len(), 1);
    let strip = |rows: &[hdrest::pipeline::SummaryRow]| {
        rows.iter().map(|r| (r.components, r.coverage, r.tau_bar, r.level, r.radius)).collect::<Vec<_>>()
    };
    assert_eq!(strip(&a.rows), strip(&b.rows));
}
