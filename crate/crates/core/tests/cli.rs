use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracdev(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracdev"))
        .args(args)
        .current_dir(dir)
        .env_remove("FRACDEV_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Vec<u8> {
    let out = fracdev(args, dir);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

const CONFIG: &str = r#"
seed = 11
n_samples = 2000
level = 7
epsilons = [0.6, 0.8, 1.0, 1.3]

[process]
kind = "lfsm"
alpha = 1.6
hurst = 0.8

[seminorm]
kind = "LP"
p = 2

[output]
json = "out.json"
csv = "out.csv"
svg = "out.svg"
"#;

#[test]
fn smallball_outputs_are_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), CONFIG).unwrap();
    let mut runs = Vec::new();
    for threads in ["1", "3"] {
        ok(&["--threads", threads, "smallball", "--config", "exp.toml"], dir.path());
        let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
        runs.push((read("out.json"), read("out.csv"), read("out.svg")));
    }
    assert_eq!(runs[0], runs[1]);
    let v: Value = serde_json::from_slice(&runs[0].0).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["epsilons"].as_array().unwrap().len(), 4);
    assert_eq!(v["diagnostics"]["estimator"], "grid");
    assert!(v["gamma_theory"].as_f64().unwrap() > 0.0);
    let hits: Vec<u64> = v["hits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h.as_u64().unwrap())
        .collect();
    assert!(hits.windows(2).all(|w| w[0] <= w[1]), "{hits:?}");
    let csv = String::from_utf8(runs[0].1.clone()).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(String::from_utf8_lossy(&runs[0].2).starts_with("<svg"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), CONFIG).unwrap();
    ok(
        &["smallball", "--config", "exp.toml", "--seed", "5", "--eps", "0.9,1.1", "--json", "b.json"],
        dir.path(),
    );
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("b.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["epsilons"], serde_json::json!([0.9, 1.1]));
    assert_eq!(v["seminorm"]["kind"], "LP");
}

#[test]
fn simulate_csv_and_binary_agree() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["simulate", "--kind", "balanced", "--alpha", "1.3", "--hurst", "0.6", "--level", "6", "--seed", "4", "--index", "9"];
    let csv = ok(&base, dir.path());
    assert_eq!(csv, ok(&base, dir.path()));
    let mut bin_args = base.to_vec();
    bin_args.extend(["--format", "binary", "-o", "p.bin"]);
    ok(&bin_args, dir.path());
    fs::write(dir.path().join("p.csv"), &csv).unwrap();
    let norm = |file: &str| -> f64 {
        let out = ok(&["seminorm", "--path", file, "--norm", "SUP"], dir.path());
        serde_json::from_slice::<Value>(&out).unwrap()["value"].as_f64().unwrap()
    };
    let (a, b) = (norm("p.csv"), norm("p.bin"));
    assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("t,value\n"));
    assert_eq!(text.lines().count(), 1 + 65);
}

#[test]
fn seminorm_reports_rate_for_binary_paths() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["simulate", "--level", "8", "--format", "binary", "-o", "bm.bin"], dir.path());
    let out = ok(&["seminorm", "--path", "bm.bin", "--norm", "HOLDER", "--eta", "0.2"], dir.path());
    let v: Value = serde_json::from_slice(&out).unwrap();
    let gamma = v["rate_gamma"].as_f64().unwrap();
    assert!((gamma - 1.0 / 0.3).abs() < 1e-12, "{gamma}");
    assert_eq!(v["class"]["membership"], "N");
}

#[test]
fn decompose_writes_coefficients_and_report() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["simulate", "--level", "10", "--seed", "2", "-o", "p.csv"], dir.path());
    let report = ok(&["decompose", "--path", "p.csv", "--coeffs", "c.csv"], dir.path());
    let v: Value = serde_json::from_slice(&report).unwrap();
    assert_eq!(v["grid_level"], 10);
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 0.2, "Brownian decay slope {slope}");
    let coeffs = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(coeffs.lines().count(), 1 + 1023);
}

#[test]
fn table_row_for_brownian_supremum() {
    let dir = tempfile::tempdir().unwrap();
    let out = String::from_utf8(ok(&["table", "--family", "brownian"], dir.path())).unwrap();
    assert!(out.lines().next().unwrap().starts_with("family,"));
    assert!(out.lines().any(|l| l.starts_with("brownian,Supremum,2,")), "{out}");
    let all = String::from_utf8(ok(&["table"], dir.path())).unwrap();
    assert!(all.lines().count() > out.lines().count());
}

#[test]
fn ratefit_recovers_brownian_rate_from_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let file = fixture("bm_sup_oracle.json");
    let v: Value = serde_json::from_slice(&ok(&["ratefit", "--results", &file], dir.path())).unwrap();
    let g = v["gamma_hat"].as_f64().unwrap();
    assert!((g - 2.0).abs() < 0.05, "{g}");
    let fixed: Value =
        serde_json::from_slice(&ok(&["ratefit", "--results", &file, "--gamma-fixed", "2"], dir.path())).unwrap();
    let k = fixed["k_hat"].as_f64().unwrap();
    let pi2_8 = std::f64::consts::PI.powi(2) / 8.0;
    assert!((k - pi2_8).abs() < 0.02, "{k}");
}

#[test]
fn axioms_command_reports_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["axioms", "--norm", "SUP", "--size", "300", "--seed", "1"], dir.path());
    let v: Value = serde_json::from_slice(&out).unwrap();
    let outcomes = v["outcomes"].as_array().unwrap();
    assert!(!outcomes.is_empty());
    assert!(outcomes.iter().all(|o| o["status"] != "failed"), "{v}");
}

fn error_of(out: &Output) -> Value {
    assert!(!out.status.success());
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.trim()).unwrap_or_else(|_| panic!("not JSON: {line}"))
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let e = error_of(&fracdev(&["smallball", "--norm", "PVAR", "--p", "2"], dir.path()));
    assert_eq!(e["error"], "not_applicable");
    assert!(e["message"].as_str().unwrap().contains("H <= beta + 1/p"));

    let e = error_of(&fracdev(&["smallball", "--n-samples", "10"], dir.path()));
    assert_eq!(e["error"], "invalid_parameter");

    let e = error_of(&fracdev(&["simulate", "--alpha", "2.5"], dir.path()));
    assert_eq!(e["error"], "invalid_parameter");

    let e = error_of(&fracdev(&["seminorm", "--path", "missing.csv", "--norm", "SUP"], dir.path()));
    assert_eq!(e["error"], "io");

    fs::write(dir.path().join("bad.toml"), "seeds = 3\n").unwrap();
    let e = error_of(&fracdev(&["smallball", "--config", "bad.toml"], dir.path()));
    assert_eq!(e["error"], "format");

    let out = fracdev(&["nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"], "usage");
}
