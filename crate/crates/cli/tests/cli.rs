use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn freqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = freqlab(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn column(doc: &Value, name: &str) -> Vec<f64> {
    doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[name].as_f64().unwrap())
        .collect()
}

fn error_kind(out: &Output) -> String {
    let err: Value = serde_json::from_slice(&out.stderr).expect("error JSON on stderr");
    err["error"]["kind"].as_str().unwrap().to_owned()
}

#[test]
fn fh_converge_sweep() {
    let doc = json_of(&["fh-converge", "--state", "q=0.5", "--copies", "1000000,100,10000"]);
    assert_eq!(column(&doc, "copies"), vec![100.0, 10_000.0, 1_000_000.0]);
    let delta = column(&doc, "delta_analytic");
    for (d, want) in delta.iter().zip([0.05, 0.005, 0.0005]) {
        assert!((d - want).abs() < 1e-15);
    }
    let slope = doc["manifest"]["summary"]["log_log_slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 1e-12);
    assert_eq!(doc["manifest"]["schema"], "freqlab/fh-converge/1");
}

#[test]
fn fh_converge_trivial_weight_and_dense_column() {
    let doc = json_of(&["fh-converge", "--state", "q=1", "--copies", "10,100"]);
    assert!(column(&doc, "delta_analytic").iter().all(|&d| d == 0.0));

    let doc = json_of(&["fh-converge", "--state", "1,1,1", "--copies", "2,8,30", "--dense"]);
    let rows = doc["rows"].as_array().unwrap();
    assert!(rows[0]["delta_dense"].is_f64());
    assert!(rows[1]["delta_dense"].is_f64());
    // 3^30 is far beyond the dense cap
    assert!(rows[2]["delta_dense"].is_null());
    assert!(doc["manifest"]["summary"]["max_dense_deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn squires_examples() {
    let doc = json_of(&["squires", "--q", "0.5", "--copies", "100"]);
    assert!((column(&doc, "max_overlap")[0] - 0.0796).abs() < 1e-4);
    let doc = json_of(&["squires", "--q", "0"]);
    assert!(column(&doc, "max_overlap").iter().all(|&v| v == 1.0));
    let doc = json_of(&["squires", "--q", "0.3", "--copies", "25,100,400,1600"]);
    assert_eq!(doc["manifest"]["summary"]["strictly_decreasing"], true);
}

#[test]
fn simulate_born_and_quartic() {
    let base = ["simulate", "--state", "q=0.3333333333333333", "--trajectories", "1000", "--length", "100000", "--seed", "11"];
    let born = json_of(&base);
    let mean = born["report"]["empirical_mean"].as_f64().unwrap();
    assert!((mean - 1.0 / 3.0).abs() < 1e-3);

    let mut args = base.to_vec();
    args.extend(["--g", "power:4"]);
    let quartic = json_of(&args);
    let mean = quartic["report"]["empirical_mean"].as_f64().unwrap();
    assert!((mean - 0.2).abs() < 1e-3);
    assert!((quartic["report"]["analytic_f"].as_f64().unwrap() - 0.2).abs() < 1e-15);
}

#[test]
fn simulate_certainty_and_per_trajectory_output() {
    let doc = json_of(&[
        "simulate", "--state", "basis:2:0", "--g", "power:4", "--trajectories", "5",
        "--length", "1000", "--seed", "1", "--per-trajectory",
    ]);
    assert_eq!(doc["report"]["empirical_mean"].as_f64(), Some(1.0));
    assert_eq!(doc["report"]["frequencies"].as_array().unwrap().len(), 5);
    assert_eq!(column(&doc, "frequency"), vec![1.0; 5]);
}

#[test]
fn simulate_requires_seed() {
    let out = freqlab(&["simulate", "--state", "q=0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");
}

#[test]
fn contextuality_witness() {
    let doc = json_of(&["contextuality", "--g", "power:4", "--dim", "3", "--pairs", "50", "--seed", "2"]);
    let delta = doc["report"]["witness"]["delta"].as_f64().unwrap();
    assert!((delta - 2.0 / 15.0).abs() < 1e-10);
    let born = json_of(&["contextuality", "--g", "power:2", "--pairs", "200", "--seed", "2"]);
    assert!(born["report"]["audit"]["max_context_deviation"].as_f64().unwrap() < 1e-10);

    let out = freqlab(&["contextuality", "--dim", "2", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "library");
}

#[test]
fn gleason_fit_reports() {
    let doc = json_of(&["gleason-fit", "--rho", "diag:0.5,0.3333333333333333,0.16666666666666667", "--seed", "4"]);
    assert!(doc["report"]["residual"].as_f64().unwrap() < 1e-8);
    assert!(doc["report"]["frobenius_error"].as_f64().unwrap() < 1e-8);
    assert_eq!(doc["report"]["density_operator"], true);
    let quartic = json_of(&["gleason-fit", "--g", "power:4", "--seed", "4"]);
    assert!(quartic["report"]["residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn components_reports() {
    let doc = json_of(&["components", "--tail", "q=0.3", "--base-prefix", "q=0.9", "--phi-prefix", "q=0.9"]);
    assert!(column(&doc, "partial_sum").iter().all(|s| (s - 1.0).abs() < 1e-12));
    assert_eq!(doc["report"]["equivalent"], true);

    let doc = json_of(&[
        "components", "--tail", "basis:2:0", "--phi-prefix", "q=0.3333333333333333",
        "--phi-phase", "-1.5", "--cutoffs", "0,1,3",
    ]);
    let sums = column(&doc, "partial_sum");
    assert!((sums[0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((sums[1] - 1.0).abs() < 1e-12);
    assert!((doc["report"]["overlap"]["value"].as_f64().unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);

    let out = freqlab(&["components", "--tail", "q=0.5", "--phi-tail", "q=0.2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tabulated_g_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("g.csv");
    fs::write(&table, "x,y\n0,0\n0.5,0.2\n1,1\n").unwrap();
    let spec = format!("table:{}", table.display());
    let doc = json_of(&[
        "simulate", "--state", "basis:3:1", "--g", &spec, "--selected", "1",
        "--trajectories", "3", "--length", "10", "--seed", "0",
    ]);
    assert_eq!(doc["report"]["analytic_f"].as_f64(), Some(1.0));

    fs::write(&table, "0,0.1\n1,1\n").unwrap();
    let out = freqlab(&["simulate", "--g", &spec, "--seed", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec![
        "simulate", "--state", "0.6,0.8i", "--g", "power:3", "--trajectories", "40",
        "--length", "2000", "--seed", "99", "--out",
    ];
    let p = path.to_str().unwrap().to_owned();
    args.push(&p);
    args.extend_from_slice(extra);
    let out = freqlab(&args);
    assert!(out.status.success());
    let sidecar: Value = serde_json::from_slice(&fs::read(format!("{p}.run.json")).unwrap()).unwrap();
    assert!(sidecar["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    fs::read(path).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_to(dir.path(), "a.json", &[]);
    let b = run_to(dir.path(), "b.json", &[]);
    let c = run_to(dir.path(), "c.json", &["--threads", "1"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    let x = run_to(dir.path(), "x.csv", &["--format", "csv"]);
    let y = run_to(dir.path(), "y.csv", &["--format", "csv", "--threads", "2"]);
    assert_eq!(x, y);
    assert!(String::from_utf8(x).unwrap().starts_with("analytic_f,empirical_mean"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = freqlab(&["bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "usage");
    assert!(freqlab(&["--help"]).status.success());
}
