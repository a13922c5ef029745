use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir")).args(args).env_remove("CASIMIR_SEED").output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: stdout={} stderr={}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn builtin_models_verify() {
    for m in ["so3", "bianchi2", "abelian"] {
        let out = casimir(&["verify", "--model", m]);
        assert_eq!(out.status.code(), Some(0), "{m}");
        assert_eq!(report(&out)["status"], "pass");
    }
}

#[test]
fn corrupted_constant_is_a_check_failure() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    // corrupt C^1_12 of the built-in
    let mut doc: Value = serde_json::from_str(&builtin_json("bianchi2")).unwrap();
    for t in doc["structure_constants"].as_array_mut().unwrap() {
        let v = t["value"].as_str().unwrap().replace('1', "2");
        t["value"] = Value::String(v);
    }
    std::fs::write(&model, doc.to_string()).unwrap();
    let out = casimir(&["verify", "--model", path(&model)]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let witness = r["checks"].as_array().unwrap().iter().find(|c| c["verdict"] == "nonzero").expect("failing bracket");
    assert!(!witness["witness"].as_array().unwrap().is_empty());
}

fn builtin_json(tag: &str) -> String {
    casimir_core::models::file::ModelFile::builtin(tag).unwrap().to_json()
}

#[test]
fn schema_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bad.json");
    std::fs::write(&model, "{\"name\": \"x\"}").unwrap();
    assert_eq!(casimir(&["verify", "--model", path(&model)]).status.code(), Some(2));
    assert_eq!(casimir(&["verify", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
}

#[test]
fn intransitive_action_is_a_solver_limitation() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let mut doc: Value = serde_json::from_str(&builtin_json("abelian")).unwrap();
    doc["generators"].as_array_mut().unwrap().pop();
    std::fs::write(&model, doc.to_string()).unwrap();
    let out = casimir(&["build-metric", "--model", path(&model)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bianchi_metric_components() {
    let r = report(&casimir(&["build-metric", "--model", "bianchi2"]));
    let g = &r["result"]["g_inv"];
    assert_eq!(g[0][1], "-v*exp(y)");
    assert_eq!(g[1][1], "1");
    assert_eq!(g[2][2], "1");
    assert_eq!(g[0][2], "0");
    let so3 = report(&casimir(&["build-metric", "--model", "so3"]));
    assert_eq!(so3["result"]["g_inv"], serde_json::json!([["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]));
}

#[test]
fn tensor_family_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    let out = casimir(&["--seed", "5", "harmonics", "so3", "--type", "2,0", "--l", "2", "--out", path(&fam)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["weight_classes"], 25);
    assert_eq!(r["result"]["lambda"], "-6");
    let back = casimir(&["verify", "--family", path(&fam)]);
    assert_eq!(back.status.code(), Some(0));
    let checks = report(&back)["checks"].as_array().unwrap().clone();
    assert_eq!(checks.last().unwrap()["name"], "verdicts-identical");
    assert!(checks.iter().all(|c| c["verdict"] != "nonzero"));
}

#[test]
fn tampered_family_fails_recertification() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    casimir(&["harmonics", "so3", "--l", "1", "--out", path(&fam)]);
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&fam).unwrap()).unwrap();
    doc["members"][0]["tensor"]["components"][0] = Value::String("sin(theta)".into());
    std::fs::write(&fam, doc.to_string()).unwrap();
    assert_eq!(casimir(&["verify", "--family", path(&fam)]).status.code(), Some(1));
}

#[test]
fn point_series_records_eigenvalue() {
    let r = report(&casimir(&["harmonics", "bianchi2", "--point-series", "--n", "1", "--m", "0", "--nu", "2"]));
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["lambda"], "5");
    let bad = casimir(&["harmonics", "bianchi2", "--point-series", "--n", "1", "--m", "1", "--nu", "0"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn constant_family_for_l0() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("f.json");
    let r = report(&casimir(&["harmonics", "so3", "--l", "0", "--out", path(&fam)]));
    assert_eq!(r["result"]["members"], 1);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&fam).unwrap()).unwrap();
    assert_eq!(doc["members"][0]["tensor"]["components"][0], "1");
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let ra = report(&casimir(&["--seed", "3", "harmonics", "bianchi2", "--covector", "--n", "2", "--m", "0", "--nu", "1", "--out", path(&a)]));
    let rb = report(&casimir(&["--seed", "3", "harmonics", "bianchi2", "--covector", "--n", "2", "--m", "0", "--nu", "1", "--out", path(&b)]));
    assert_eq!(ra["digest"], rb["digest"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rc = report(&casimir(&["--seed", "4", "harmonics", "bianchi2", "--covector", "--n", "2", "--m", "0", "--nu", "1"]));
    assert_ne!(ra["digest"], rc["digest"]);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_casimir")).args(["verify", "--model", "so3"]).env("CASIMIR_SEED", "11").output().unwrap();
    assert_eq!(report(&out)["seed"], 11);
}

#[test]
fn csv_samples() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let out = casimir(&[
        "harmonics", "bianchi2", "--hypergeometric", "--mu", "0", "--nu", "0", "--lambda", "1", "--grid", "0:0.5:3",
        "--format", "csv", "--out", path(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "v,re,im");
    let last: Vec<f64> = rows[3].split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[1] - 1.25f64.sqrt()).abs() < 1e-12);
    assert_eq!(casimir(&["harmonics", "so3", "--l", "1", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn reduce_and_residual() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&casimir(&["reduce", "--model", "bianchi2", "--lower", "1"]));
    let terms = r["result"]["operator"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 5);

    let t = dir.path().join("t.json");
    std::fs::write(
        &t,
        r#"{"chart":"sphere","upper":0,"lower":0,"frame":"coordinate","components":["cos(theta)"]}"#,
    )
    .unwrap();
    let ok = casimir(&["residual", "--model", "so3", "--tensor", path(&t), "--lambda", "-2"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = casimir(&["residual", "--model", "so3", "--tensor", path(&t), "--lambda", "2"]);
    assert_eq!(bad.status.code(), Some(1));
}
