mod common;

use std::fs;
use std::process::Command;

use common::{csv_rows, json, ok, slitsic, vec3};
use tempfile::tempdir;

#[test]
fn search_catalog_is_reproducible() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let args = ["search", "--zeta-max", "5", "--starts", "2000", "--seed", "7"];
    ok(d, &[&args[..], &["-o", "a.json"]].concat());
    ok(d, &[&args[..], &["-o", "b.json"]].concat());
    ok(d, &["search", "--config", "a.json", "-o", "c.json"]);
    let a = fs::read(d.join("a.json")).unwrap();
    assert_eq!(a, fs::read(d.join("b.json")).unwrap());
    assert_eq!(a, fs::read(d.join("c.json")).unwrap());

    let doc = json(&d.join("a.json"));
    assert_eq!(doc["config"]["seed"], 7);
    let sols = doc["solutions"].as_array().unwrap();
    let first = sols
        .iter()
        .find(|s| (s["zeta"].as_f64().unwrap() - 3.4678).abs() < 1e-3)
        .expect("nearest-plane row");
    assert!((first["delta_balanced"].as_f64().unwrap() - 2.76444).abs() < 1e-3);
    assert!((first["xi"][2].as_f64().unwrap() - 0.6315).abs() < 1e-3);
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    ok(d, &["search", "--zeta-max", "5", "--starts", "50", "-o", "a.json"]);
    ok(d, &["search", "--config", "a.json", "--seed", "9", "-o", "b.json"]);
    let b = json(&d.join("b.json"));
    assert_eq!(b["config"]["seed"], 9);
    assert_eq!(b["config"]["n_starts"], 50);
}

#[test]
fn empty_range_exits_with_no_solutions() {
    let dir = tempdir().unwrap();
    let out = slitsic(dir.path(), &["search", "--zeta-max", "1", "-o", "none.json"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json(&dir.path().join("none.json"));
    assert!(doc["solutions"].as_array().unwrap().is_empty());
}

#[test]
fn error_exit_codes() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    let bad_range = slitsic(d, &["search", "--zeta-min", "3", "--zeta-max", "2"]);
    assert_eq!(bad_range.status.code(), Some(2));
    let bad_state = slitsic(d, &["pattern", "--zeta", "1", "--delta", "2", "--state", "1,1,1"]);
    assert_eq!(bad_state.status.code(), Some(2));
    let missing = slitsic(d, &["reconstruct", "--counts", "absent.json"]);
    assert_eq!(missing.status.code(), Some(4));
    let unwritable = slitsic(d, &["geometry", "-o", "/proc/no/such/dir/g.csv"]);
    assert_eq!(unwritable.status.code(), Some(4));

    ok(d, &["geometry", "-o", "g.csv"]);
    let wrong_kind = slitsic(d, &["search", "--config", "g.csv"]);
    assert_eq!(wrong_kind.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_slitsic"))
        .args(["geometry"])
        .env("SLITSIC_OUT_DIR", dir.path().join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("out/geometry.csv").exists());
}

#[test]
fn geometry_rows_and_scaling() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    ok(d, &["geometry", "--pair", "650:100", "--pair", "650:200", "-o", "g.csv"]);
    let rows = csv_rows(&d.join("g.csv"));
    assert!((rows[0]["two_d_um"] - 553.0).abs() <= 1.0);
    assert!((rows[0]["x3_um"] - 63.0).abs() <= 1.0);
    assert!((rows[0]["x4_um"] - 242.0).abs() <= 1.0);
    assert!((rows[0]["z_det_cm"] - 33.53).abs() <= 0.05);
    for col in ["two_d_um", "x3_um", "x4_um"] {
        assert!((rows[1][col] / rows[0][col] - 2.0).abs() < 1e-12);
    }
    assert!((rows[1]["z_det_cm"] / rows[0]["z_det_cm"] - 4.0).abs() < 1e-12);

    ok(d, &["geometry", "--config", "g.csv", "-o", "again.csv"]);
    assert_eq!(fs::read(d.join("g.csv")).unwrap(), fs::read(d.join("again.csv")).unwrap());
}

#[test]
fn mixed_state_pattern_is_half_the_envelope() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    ok(d, &["pattern", "--zeta", "3.4678", "--delta", "2.76444", "--spacing", "0.005", "-o", "p.csv"]);
    let rows = csv_rows(&d.join("p.csv"));
    for r in &rows {
        assert!((r["pdf"] - r["envelope"] / 2.0).abs() <= 1e-15);
    }
    let mass: f64 = rows.iter().map(|r| r["pdf"]).sum::<f64>() * 0.005;
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}

#[test]
fn bloch_curve_rows() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    ok(d, &["bloch-curve", "--preset", "reference", "-o", "b.csv"]);
    let rows = csv_rows(&d.join("b.csv"));
    let centre = rows.iter().find(|r| r["xi"] == 0.0 && r["detector"] == 0.0).unwrap();
    assert_eq!([centre["s_x"], centre["s_y"], centre["s_z"]], [1.0, 0.0, 0.0]);
    for r in &rows {
        let n = r["s_x"].powi(2) + r["s_y"].powi(2) + r["s_z"].powi(2);
        assert!((n - 1.0).abs() < 1e-12);
    }
    let det: Vec<[f64; 3]> = rows
        .iter()
        .filter(|r| r["detector"] > 0.0)
        .map(|r| [r["s_x"], r["s_y"], r["s_z"]])
        .collect();
    assert_eq!(det.len(), 4);
    for i in 0..4 {
        for j in 0..i {
            let dot: f64 = (0..3).map(|k| det[i][k] * det[j][k]).sum();
            assert!((dot + 1.0 / 3.0).abs() < 1e-4);
        }
    }
}

#[test]
fn simulate_then_reconstruct() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    // 1.5e10 photons leave about 10⁷ in the windows
    let sim = ["simulate", "--preset", "reference", "--state", "s1", "--method", "multinomial"];
    ok(d, &[&sim[..], &["--photons", "15000000000", "--seed", "4", "-o", "c.json"]].concat());
    ok(d, &["reconstruct", "--counts", "c.json", "-o", "r.json"]);
    let rep = json(&d.join("r.json"));
    assert!(rep["counts"]["n"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum::<u64>() >= 100_000);
    for est in ["linear", "mle"] {
        assert!(rep[est]["fidelity"].as_f64().unwrap() > 0.999, "{est}");
    }

    ok(d, &["simulate", "--config", "c.json", "-o", "c2.json"]);
    ok(d, &["reconstruct", "--config", "r.json", "-o", "r2.json"]);
    assert_eq!(fs::read(d.join("c.json")).unwrap(), fs::read(d.join("c2.json")).unwrap());
    assert_eq!(fs::read(d.join("r.json")).unwrap(), fs::read(d.join("r2.json")).unwrap());
}

#[test]
fn mixed_state_reconstruction_is_near_origin() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--preset", "reference", "--photons", "200000000", "-o", "c.json"]);
    ok(d, &["reconstruct", "--counts", "c.json", "--artificial-balance", "-o", "r.json"]);
    let rep = json(&d.join("r.json"));
    let accepted: u64 = rep["counts"]["n"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert!(accepted >= 100_000);
    for est in ["linear", "mle", "artificial"] {
        let r = vec3(&rep[est]["r_hat"]);
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 0.02, "{est}: {norm}");
    }
}

#[test]
fn boundary_counts_and_design_checks() {
    let dir = tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--preset", "reference", "--photons", "1000000", "-o", "c.json"]);
    let mut doc = json(&d.join("c.json"));
    let total = doc["counts"]["n_total"].as_u64().unwrap();
    doc["counts"]["n"] = serde_json::json!([1000, 0, 0, 0]);
    doc["counts"]["n_discarded"] = serde_json::json!(total - 1000);
    fs::write(d.join("edge.json"), serde_json::to_string(&doc).unwrap()).unwrap();

    ok(d, &["reconstruct", "--counts", "edge.json", "-o", "r.json"]);
    let rep = json(&d.join("r.json"));
    assert_eq!(rep["linear"]["projected"], true);
    let mle = vec3(&rep["mle"]["r_hat"]);
    assert!(mle.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12);

    ok(d, &["design", "--preset", "reference", "--delta-xi", "0.002", "-o", "wide.json"]);
    let mismatch = slitsic(d, &["reconstruct", "--counts", "c.json", "--design", "wide.json"]);
    assert_eq!(mismatch.status.code(), Some(2));
    ok(d, &["reconstruct", "--counts", "c.json", "--preset", "reference", "-o", "same.json"]);

    doc["counts"]["n"] = serde_json::json!([0, 0, 0, 0]);
    doc["counts"]["n_discarded"] = serde_json::json!(total);
    fs::write(d.join("zero.json"), serde_json::to_string(&doc).unwrap()).unwrap();
    let zero = slitsic(d, &["reconstruct", "--counts", "zero.json"]);
    assert_eq!(zero.status.code(), Some(2));
}
