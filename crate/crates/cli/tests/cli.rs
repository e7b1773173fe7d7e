use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sphere_energy::sampling::{ReferenceSampler, VonMisesFisher};
use sphere_energy::sphere::sample_uniform;
use sphere_energy::UnitVector;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-energy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn write_points(dir: &TempDir, name: &str, pts: &[UnitVector]) -> PathBuf {
    let body: String = pts
        .iter()
        .map(|p| {
            let row: Vec<String> = p.coords().iter().map(|c| format!("{c:.17e}")).collect();
            row.join(",") + "\n"
        })
        .collect();
    write(dir, name, &body)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cluster_groups_close_pair() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "p.csv", "1,0\n0.995,0.0998\n-0.46 0.888\n");
    let out = run(&["cluster", s(&pts), "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["labels"], serde_json::json!([0, 0, 1]));
    assert_eq!(v["config"]["command"], "cluster");
}

#[test]
fn verify_negtype_certifies() {
    let out = run(&["verify", "negtype", "--trials", "100", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["metrics"]["max_quadratic_form"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["passed"], true);
    assert_eq!(v["certificate"]["verdict"], "null_direction_found");
    assert_eq!(v["config"]["seed"], 3);
}

#[test]
fn verify_identity_builtin_pair() {
    let out = run(&["verify", "identity", "--samples", "100000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let est = &v["estimate"];
    let value = est["value"].as_f64().unwrap();
    let se = est["std_error"].as_f64().unwrap();
    assert!((value - PI / 2.0).abs() <= 3.0 * se);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = write_points(&dir, "a.csv", &sample_uniform(3, 30, 1).unwrap());
    let b = write_points(&dir, "b.csv", &sample_uniform(3, 30, 2).unwrap());
    let args = [
        "test-two-sample",
        s(&a),
        s(&b),
        "--seed",
        "9",
        "--permutations",
        "199",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let v = json(&first);
    assert_eq!(v["method"], "energy-permutation");
    assert_eq!(v["replications"], 199);
}

#[test]
fn strict_exit_on_rejection() {
    let dir = TempDir::new().unwrap();
    let north = VonMisesFisher::new(UnitVector::basis(3, 2).unwrap(), 5.0).unwrap();
    let south = VonMisesFisher::new(UnitVector::basis(3, 2).unwrap().reflect(), 5.0).unwrap();
    let a = write_points(&dir, "a.csv", &north.sample(40, 1));
    let b = write_points(&dir, "b.csv", &south.sample(40, 2));

    let plain = run(&["test-two-sample", s(&a), s(&b)]);
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(json(&plain)["reject"], true);

    let strict = run(&["test-two-sample", s(&a), s(&b), "--strict-exit"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn independence_detects_rotation() {
    let dir = TempDir::new().unwrap();
    let xs = sample_uniform(3, 40, 4).unwrap();
    let ys: Vec<_> = xs
        .iter()
        .map(|p| {
            let c = p.coords();
            UnitVector::from_slice(&[-c[1], c[0], c[2]]).unwrap()
        })
        .collect();
    let x = write_points(&dir, "x.csv", &xs);
    let y = write_points(&dir, "y.csv", &ys);
    let v = json(&run(&[
        "test-independence",
        s(&x),
        s(&y),
        "--permutations",
        "199",
    ]));
    assert_eq!(v["method"], "dcov-permutation");
    assert!(v["p_value"].as_f64().unwrap() <= 0.01);
}

#[test]
fn gof_references() {
    let dir = TempDir::new().unwrap();
    let a = write_points(&dir, "a.csv", &sample_uniform(3, 25, 5).unwrap());
    let out = run(&[
        "test-gof",
        s(&a),
        "--ref",
        "uniform",
        "--permutations",
        "99",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["method"], "energy-gof");
    assert_eq!(v["reference_size"], 100);

    let pole = write(&dir, "pole.csv", "0 0 1\n");
    let vmf_ref = format!("vmf:8:{}", s(&pole));
    let v = json(&run(&[
        "test-gof",
        s(&a),
        "--ref",
        &vmf_ref,
        "--m",
        "50",
        "--permutations",
        "99",
    ]));
    assert_eq!(v["reference_size"], 50);
    assert!(v["p_value"].as_f64().unwrap() <= 0.05);

    for bad in ["vmf:x:pole.csv", "gauss", "vmf:1:"] {
        assert_eq!(
            run(&["test-gof", s(&a), "--ref", bad]).status.code(),
            Some(2)
        );
    }
}

#[test]
fn fingerprint_with_weights_and_restriction() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.csv", "# weights\n1,0,0,0.25\n0,1,0,0.75\n");
    let d = write(&dir, "d.csv", "1,-0.1,0\n-0.1,1,0\n-1,-1,0.1\n");
    let v = json(&run(&["fingerprint", s(&m), "--directions", s(&d)]));
    assert_eq!(v["masses"], serde_json::json!([0.25, 0.75, 0.0]));

    let pole = write(&dir, "pole.csv", "1 0 0\n");
    let v = json(&run(&[
        "fingerprint",
        s(&m),
        "--directions",
        s(&d),
        "--restrict",
        s(&pole),
    ]));
    assert_eq!(v["masses"], serde_json::json!([0.25, 0.0, 0.0]));
    assert_eq!(
        v["restricted_to"]["pole"],
        serde_json::json!([1.0, 0.0, 0.0])
    );
}

#[test]
fn tsv_output() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "p.csv", "1,0\n0.995,0.0998\n-0.46,0.888\n");
    let out = run(&["cluster", s(&pts), "--k", "2", "--format", "tsv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "labels\t0,0,1"));
    assert!(text.lines().any(|l| l == "config.output_format\ttsv"));
}

#[test]
fn input_and_usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let zero = write(&dir, "z.csv", "1,0\n0,0\n");
    let out = run(&["cluster", s(&zero), "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));

    let ok = write(&dir, "ok.csv", "1,0\n0,1\n");
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["cluster", s(&ok), "--k", "3"]).status.code(), Some(2));
    assert_eq!(
        run(&["cluster", s(&ok), "--k", "1", "--r", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["cluster", s(&ok), "--k", "1", "--alpha", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["cluster", "/nonexistent.csv", "--k", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["verify", "nope"]).status.code(), Some(2));
}
