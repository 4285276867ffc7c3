use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gnc_lasso::graph::SpectralBasis;
use gnc_lasso::io::{write_edge_list, write_matrix_csv, ModelDocument};
use gnc_lasso::sim::{sample_data, simulate_means, simulate_precision};
use gnc_lasso::smoother::{gcv_curve, smooth_means, standardize_columns};
use gnc_lasso::Network;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gnc-lasso"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
    x: gnc_lasso::Matrix,
    net: Network,
    truth: Vec<(usize, usize)>,
}

impl Fixture {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

/// Cohesive data on a 6 x 6 lattice with 10 variables.
fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let net = Network::lattice(6).unwrap();
    let basis = SpectralBasis::<f64>::from_network(&net).unwrap();
    let sp = simulate_precision::<f64>(10, 0.2, 3).unwrap();
    let m = simulate_means(&basis, 10, 4, 0.5, 1.6, &sp.sigma, 4).unwrap();
    let x = sample_data(&m, &sp.sigma, 5).unwrap();
    fs::write(dir.path().join("data.csv"), write_matrix_csv(&x)).unwrap();
    fs::write(dir.path().join("edges.txt"), write_edge_list(&net)).unwrap();
    let truth_text: String = sp.support.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
    fs::write(dir.path().join("truth.txt"), truth_text).unwrap();
    Fixture { dir, x, net, truth: sp.support }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const DATA: [&str; 4] = ["--data", "data.csv", "--edges", "edges.txt"];

#[test]
fn fit_round_trips_the_model_bit_exactly() {
    let fx = fixture();
    let mut args = vec!["fit"];
    args.extend(DATA);
    args.extend(["--alpha", "2.5", "--lambda", "0.05", "--out", "model.json"]);
    let stdout = ok(fx.dir.path(), &args);
    assert!(stdout.contains("support size:"));

    let doc = ModelDocument::from_json(&fs::read_to_string(fx.path("model.json")).unwrap()).unwrap();
    assert_eq!(doc.alpha, 2.5);
    assert!(doc.standardized);

    // same fit through the library
    let basis = SpectralBasis::<f64>::from_network(&fx.net).unwrap();
    let x = standardize_columns(&fx.x).unwrap();
    let model =
        gnc_lasso::pipeline::fit_two_stage(&x, &basis, 2.5, 0.05, &gnc_lasso::GlassoOptions::default()).unwrap();
    assert_eq!(doc.m_hat().unwrap(), model.mean_fit.m_hat);
    assert_eq!(doc.theta().unwrap(), model.precision_fit.theta);

    let manifest = read_json(&fx.path("model.json.manifest.json"));
    assert_eq!(manifest["command"], "fit");
    let inputs = manifest["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 2);
    let digest = gnc_lasso::io::sha256_hex(&fs::read(fx.path("data.csv")).unwrap());
    assert_eq!(inputs[0]["sha256"], digest.as_str());
}

#[test]
fn gcv_choice_is_recorded_in_manifest() {
    let fx = fixture();
    let mut args = vec!["fit"];
    args.extend(DATA);
    args.extend(["--gcv", "--lambda", "0.1", "--out", "m.json"]);
    ok(fx.dir.path(), &args);
    let manifest = read_json(&fx.path("m.json.manifest.json"));
    let config = &manifest["config"];
    assert_eq!(config["alpha_method"], "gcv");

    let basis = SpectralBasis::<f64>::from_network(&fx.net).unwrap();
    let x = standardize_columns(&fx.x).unwrap();
    let grid = gnc_lasso::smoother::default_alpha_grid::<f64>();
    let curve = gcv_curve(&x, &basis, &grid).unwrap();
    let (best, _) = curve
        .scores
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    assert_eq!(config["alpha"].as_f64().unwrap(), grid[best]);
    assert_eq!(config["alpha_tuning"]["chosen_alpha"].as_f64().unwrap(), grid[best]);

    let doc = ModelDocument::from_json(&fs::read_to_string(fx.path("m.json")).unwrap()).unwrap();
    assert_eq!(doc.alpha, grid[best]);
    let fit = smooth_means(&x, &basis, grid[best]).unwrap();
    assert_eq!(doc.m_hat().unwrap(), fit.m_hat);
}

#[test]
fn target_edges_gives_requested_support() {
    let fx = fixture();
    let mut args = vec!["fit"];
    args.extend(DATA);
    args.extend(["--alpha", "3", "--target-edges", "25", "--out", "t.json"]);
    let stdout = ok(fx.dir.path(), &args);
    assert!(stdout.contains("support size: 25"), "{stdout}");
    let doc = ModelDocument::from_json(&fs::read_to_string(fx.path("t.json")).unwrap()).unwrap();
    assert_eq!(doc.theta.support_size, 25);
    assert_eq!(doc.config.lambda_method, "target-edges");
}

#[test]
fn tune_writes_curve() {
    let fx = fixture();
    let mut args = vec!["tune"];
    args.extend(DATA);
    args.extend(["--cv-folds", "6", "--alphas", "0.1,1,10,100", "--out", "tune.json"]);
    ok(fx.dir.path(), &args);
    let curve = read_json(&fx.path("tune.json"));
    assert_eq!(curve["alphas"].as_array().unwrap().len(), 4);
    let scores: Vec<f64> = curve["scores"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let idx = curve["chosen_index"].as_u64().unwrap() as usize;
    assert!(scores.iter().all(|&s| s >= scores[idx]));
    assert!(fx.path("tune.json.manifest.json").exists());
}

#[test]
fn roc_reports_path() {
    let fx = fixture();
    assert!(!fx.truth.is_empty());
    let mut args = vec!["roc"];
    args.extend(DATA);
    args.extend(["--alpha", "3", "--truth", "truth.txt", "--lambda-count", "12", "--out", "roc.csv"]);
    let stdout = ok(fx.dir.path(), &args);
    let auc: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("AUC: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.0..=1.0).contains(&auc));
    let csv = fs::read_to_string(fx.path("roc.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "lambda,fpr,tpr,support_size");
    assert_eq!(lines.count(), 12);
}

#[test]
fn diagnose_lattice_and_json() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("grid.txt"), write_edge_list(&Network::lattice(20).unwrap())).unwrap();
    let stdout = ok(dir.path(), &["diagnose", "--edges", "grid.txt"]);
    assert!(stdout.contains("nodes: 400"));
    assert!(stdout.contains("effective dimension: 30"), "{stdout}");

    let json = ok(dir.path(), &["diagnose", "--edges", "grid.txt", "--json", "--out", "d.json"]);
    let v: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["effective_dimension"], 30);
    assert_eq!(v["series"].as_array().unwrap().len(), 399);
    assert_eq!(read_json(&dir.path().join("d.json")), v);
    assert!(dir.path().join("d.json.manifest.json").exists());
}

#[test]
fn validation_errors_exit_2() {
    let fx = fixture();
    fs::write(fx.path("split.txt"), "0 1\n2 3\n").unwrap();
    let out = run(fx.dir.path(), &["diagnose", "--edges", "split.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disconnected (2 components)"));

    let out = run(fx.dir.path(), &["fit", "--data", "missing.csv", "--edges", "edges.txt", "--alpha", "1", "--lambda", "0.1"]);
    assert_eq!(out.status.code(), Some(2));

    let mut args = vec!["fit"];
    args.extend(DATA);
    args.extend(["--alpha", "1"]);
    let out = run(fx.dir.path(), &args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lambda or --target-edges"));

    fs::write(fx.path("holes.csv"), "1,2\n3,\n").unwrap();
    fs::write(fx.path("pair.txt"), "0 1\n").unwrap();
    let out = run(fx.dir.path(), &["fit", "--data", "holes.csv", "--edges", "pair.txt", "--alpha", "1", "--lambda", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing value"));

    let out = run(fx.dir.path(), &["simulate", "--n", "50"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let fx = fixture();
    // with no smoothing the means interpolate the data and the residuals vanish
    let mut args = vec!["fit"];
    args.extend(DATA);
    args.extend(["--alpha", "0", "--lambda", "0.1", "--no-standardize"]);
    let out = run(fx.dir.path(), &args);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn small_simulation_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["--seed", "3", "simulate", "--n", "36", "--p", "10", "--edge-prob", "0.2", "--reps", "2", "--out-dir", "sim"],
    );
    let report = fs::read_to_string(dir.path().join("sim/report.csv")).unwrap();
    assert!(report.starts_with("replicate,method,lambda,fpr,tpr\n"));
    let summary = read_json(&dir.path().join("sim/summary.json"));
    assert_eq!(summary["methods"].as_array().unwrap().len(), 4);
    assert!(dir.path().join("sim/report.csv.manifest.json").exists());
    assert!(dir.path().join("sim/summary.json.manifest.json").exists());
}
