mod common;

use std::path::Path;
use std::process::{Command, Output};

use hdrest_core::simbench::MixtureModel;

fn hdrest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdrest")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn sample_csv(dir: &Path, model: u8, n: usize) -> String {
    let pts = MixtureModel::catalog(model).unwrap().sample(n, 7);
    let mut s = String::from("x,y\n");
    for p in pts.iter() {
        s.push_str(&format!("{},{}\n", p.x, p.y));
    }
    let path = dir.join(format!("model{model}.csv"));
    std::fs::write(&path, s).unwrap();
    path.to_string_lossy().into_owned()
}

fn square(x0: f64) -> serde_json::Value {
    serde_json::json!({
        "type": "Polygon",
        "coordinates": [[[x0, 0.0], [x0 + 1.0, 0.0], [x0 + 1.0, 1.0], [x0, 1.0], [x0, 0.0]]]
    })
}

#[test]
fn estimate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path(), 1, 400);
    let out_dir = dir.path().join("out");
    let out = hdrest(&["estimate", &input, "--method", "plugin", "--tau", "0.5", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("components=1"));
    for f in ["estimate.json", "estimate.geojson", "summary.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("estimate.geojson")).unwrap()).unwrap();
    assert_eq!(doc["features"][0]["properties"]["method"], "plugin");
}

#[test]
fn invalid_settings_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path(), 1, 100);
    assert_eq!(code(&hdrest(&["estimate", &input, "--tau", "1.5"])), 2);
    assert_eq!(code(&hdrest(&["estimate", &input, "--method", "hybrid", "--tau", "0.5", "--p", "0.7"])), 2);
    assert_eq!(code(&hdrest(&["estimate", &input, "--x-column", "lon"])), 2);

    let cases = dir.path().join("cases.csv");
    std::fs::write(&cases, "lon,lat,date\n1.0,40.0,2020-03-02\n").unwrap();
    let out_dir = dir.path().join("p");
    assert_eq!(code(&hdrest(&["pipeline", cases.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])), 2);
}

#[test]
fn bench_requires_a_seed() {
    let out = hdrest(&["bench", "--models", "1", "--replicates", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn non_convergence_keeps_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path(), 7, 600);
    let out_dir = dir.path().join("out");
    let out = hdrest(&[
        "estimate",
        &input,
        "--method",
        "hybrid",
        "--tau",
        "0.8",
        "--bootstrap",
        "20",
        "--max-iterations",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("converged=false"));
    assert!(out_dir.join("estimate.geojson").exists());
}

#[test]
fn pipeline_prints_cluster_table() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, _) = common::two_city_csv(1, 600, 4);
    let cases = dir.path().join("cases.csv");
    std::fs::write(&cases, csv).unwrap();
    let out_dir = dir.path().join("weeks");
    let out = hdrest(&["pipeline", cases.to_str().unwrap(), "--method", "plugin", "--tau", "0.8", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().next(), Some("week,plugin@0.8"));
    assert_eq!(stdout.lines().nth(1), Some("0,2"));
    assert!(out_dir.join("week_000.geojson").exists());
}

#[test]
fn metrics_compares_region_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.geojson");
    let b = dir.path().join("b.geojson");
    std::fs::write(&a, square(0.0).to_string()).unwrap();
    std::fs::write(&b, square(2.0).to_string()).unwrap();
    let out = hdrest(&["metrics", a.to_str().unwrap(), b.to_str().unwrap(), "--bbox", "-0.5,3.5,-0.5,1.5", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["hausdorff"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let m = v["distance_in_measure"].as_f64().unwrap();
    assert!((m - 2.0).abs() <= 3.0 * v["std_error"].as_f64().unwrap(), "{m}");
    assert_eq!(code(&hdrest(&["metrics", a.to_str().unwrap(), b.to_str().unwrap(), "--bbox", "0,1,2"])), 2);
}
