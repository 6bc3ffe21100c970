use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgm"))
        .args(args)
        .output()
        .expect("failed to launch sgm")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fixture(name: &str) -> String {
    fixture_dir().join(name).to_string_lossy().into_owned()
}

fn entry(v: &Value, i: usize, j: usize) -> f64 {
    v["result"]["data"][i][j].as_f64().unwrap()
}

#[test]
fn spectral_mean_of_swapped_diagonals() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "2\n1 0\n0 4\n");
    let b = write(&dir, "b.txt", "2\n4 0\n0 1\n");
    let out = sgm(&["mean", &a, &b, "--kind", "spectral", "--t", "0.5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((entry(&v, 0, 0) - 2.0).abs() < 1e-12);
    assert!((entry(&v, 1, 1) - 2.0).abs() < 1e-12);
    assert!(entry(&v, 0, 1).abs() < 1e-12);
    assert_eq!(v["self_check_passed"], true);
}

#[test]
fn metric_mean_at_zero_weight_is_first_argument() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "2\n2 1\n1 3\n");
    let b = write(&dir, "b.json", r#"{"rows": 2, "data": [[5, -1], [-1, 1]]}"#);
    let out = sgm(&["mean", &a, &b, "--kind", "metric", "--t", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    let expected = [[2.0, 1.0], [1.0, 3.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((entry(&v, i, j) - expected[i][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn distances() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "2\n2 1\n1 3\n");
    let v = json(&sgm(&["dist", &a, &a]));
    assert!(v["semi_metric"].as_f64().unwrap() < 1e-12);
    assert!(v["thompson"].as_f64().unwrap() < 1e-12);

    let x = write(&dir, "x.txt", "2\n1 0\n0 4\n");
    let y = write(&dir, "y.txt", "2\n4 0\n0 1\n");
    let v = json(&sgm(&["dist", &x, &y]));
    let ln4 = 4f64.ln();
    assert!((v["semi_metric"].as_f64().unwrap() - ln4).abs() < 1e-12);
    assert!((v["thompson"].as_f64().unwrap() - ln4).abs() < 1e-12);

    let v = json(&sgm(&[
        "dist",
        &fixture("convexity_b.txt"),
        &fixture("convexity_c.txt"),
    ]));
    assert!((v["semi_metric"].as_f64().unwrap() - 2.7798).abs() < 1e-3);
}

#[test]
fn tolerance_relations() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "2\n1 0\n0 4\n");
    let b = write(&dir, "b.txt", "2\n4 0\n0 1\n");
    let out = sgm(&["tolerance", &a, &b]);
    assert!(out.status.success());
    let v = json(&out);
    assert_ne!(v["pair"]["relation"], "none");
    assert_eq!(v["closed_forms"]["sigma_spectral"]["passed"], true);
    assert!(v["closed_forms"]["tilde_unit_det"]["not_applicable"].is_string());

    let d = write(&dir, "d.txt", "3\n1 0 0\n0 2 0\n0 0 3\n");
    let i = write(&dir, "i.txt", "3\n1 0 0\n0 1 0\n0 0 1\n");
    let v = json(&sgm(&["tolerance", &d, &i]));
    assert_eq!(v["pair"]["relation"], "none");
    assert_eq!(v["l_ab_limit_branch"], false);
}

#[test]
fn pinch_chains() {
    let dir = TempDir::new().unwrap();
    let hi = write(&dir, "hi.txt", "4 1\n");
    let flat = write(&dir, "flat.txt", "2 2\n");

    let out = sgm(&["pinch", &hi, &flat]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["averaging_steps"], 1);
    assert_eq!(v["chain"]["steps"][0]["i"], 1);
    assert_eq!(v["passed"], true);

    let v = json(&sgm(&["pinch", &hi, &hi]));
    assert_eq!(v["averaging_steps"], 0);

    let out = sgm(&["pinch", &flat, &hi]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"]["kind"], "NotLogMajorized");
}

#[test]
fn bad_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "2\n1 0\n0 x\n");
    let out = sgm(&["dist", &a, &a]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "Parse");
    assert!(!out.stderr.is_empty());

    let neg = write(&dir, "neg.txt", "2\n1 0\n0 -1\n");
    let out = sgm(&["dist", &neg, &neg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "NotPositiveDefinite");

    let missing = dir.path().join("nope.txt");
    let out = sgm(&["dist", missing.to_str().unwrap(), &a]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--seed", "7", "--m", "2,3", "--trials", "4"];
    let first = sgm(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stdout));
    let v = json(&first);
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["suites"].as_array().unwrap().len(), 12);
    let second = sgm(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn verify_rejects_bad_dims() {
    let out = sgm(&["verify", "--m", "1", "--trials", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "InvalidConfig");
}

#[test]
fn corrupted_fixture_fails_by_name() {
    let dir = TempDir::new().unwrap();
    for name in ["convexity_a.txt", "convexity_b.txt"] {
        fs::copy(fixture_dir().join(name), dir.path().join(name)).unwrap();
    }
    let m = fs::read_to_string(fixture_dir().join("convexity_a.txt")).unwrap();
    let n: usize = m.lines().next().unwrap().trim().parse().unwrap();
    let mut ident = format!("{n}\n");
    for i in 0..n {
        let row: Vec<&str> = (0..n).map(|j| if i == j { "1" } else { "0" }).collect();
        ident.push_str(&row.join(" "));
        ident.push('\n');
    }
    write(&dir, "convexity_c.txt", &ident);

    let out = sgm(&[
        "verify",
        "--m",
        "2",
        "--trials",
        "2",
        "--fixture",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let v = json(&out);
    assert_eq!(v["passed"], false);
    let failed: Vec<&str> = v["suites"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["passed"] == false)
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["convexity_counterexample"]);
}

#[test]
fn json_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "2\n2 1\n1 3\n");
    let target = dir.path().join("out.json");
    let out = sgm(&["--json", target.to_str().unwrap(), "dist", &a, &a]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&target).unwrap()).unwrap();
    assert!(v["semi_metric"].is_number());
}
