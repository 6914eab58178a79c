use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmagic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmagic"))
        .args(args)
        .env("QMAGIC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = qmagic(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn measures_of_a_stabilizer_state() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "s.json", r#"{"q":3,"N":2,"amplitudes":[[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#);
    let v: Value = serde_json::from_str(&ok_stdout(&["measures", "--state", &state])).unwrap();
    assert!(v["mana"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["one_norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["m2"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn measures_of_the_strange_state() {
    let dir = tempfile::tempdir().unwrap();
    let a = 0.5f64.sqrt();
    let state = write(
        dir.path(),
        "s.json",
        &format!(r#"{{"q":3,"N":1,"amplitudes":[[0,0],[{a},0],[-{a},0]]}}"#),
    );
    let v: Value = serde_json::from_str(&ok_stdout(&["measures", "--state", &state])).unwrap();
    assert!((v["mana"].as_f64().unwrap() - (5.0f64 / 3.0).ln()).abs() < 1e-12);
    let table = ok_stdout(&["wigner", "--state", &state, "--q", "3"]);
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("index,m0,n0,value"));
    let values: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 9);
    assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((values.iter().cloned().fold(f64::INFINITY, f64::min) + 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn concentration_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"n_sites":7,"depth":2,"region_a":[2,3,4],"region_m":[0,1,5,6],"scenario":"concentration"}"#,
    );
    let v: Value = serde_json::from_str(&ok_stdout(&["statmech-predict", "--config", &cfg])).unwrap();
    let p = &v["predictions"][0];
    assert_eq!(p["scenario"], "concentration");
    assert_eq!(p["mana_logq_units"].as_f64(), Some(1.0));
    assert!(p["detail"]["walls"].is_object());
}

#[test]
fn prediction_sweep_covers_every_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.json", r#"{"n_sites":4,"depth":2,"region_a":[0,1]}"#);
    let v: Value = serde_json::from_str(&ok_stdout(&["statmech-predict", "--config", &cfg])).unwrap();
    let n = v["predictions"].as_array().unwrap().len() + v["skipped"].as_array().unwrap().len();
    assert_eq!(n, 6);
}

#[test]
fn clifford_run_matches_prediction_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"q":3,"n_sites":4,"depth":2,"scenario":"single_qudit_injection","region_a":[0,1],"samples":16,"seed":5}"#,
    );
    let run1 = dir.path().join("r1");
    let run2 = dir.path().join("r2");
    for r in [&run1, &run2] {
        ok_stdout(&["run", "--config", &cfg, "--out", r.to_str().unwrap()]);
    }
    let a = std::fs::read(run1.join("samples.csv")).unwrap();
    assert_eq!(a, std::fs::read(run2.join("samples.csv")).unwrap());
    assert!(String::from_utf8_lossy(&a).starts_with("sample_id,seed,measure,value\n"));

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(run1.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);

    let preds = ok_stdout(&["statmech-predict", "--config", &cfg]);
    let pfile = write(dir.path(), "p.json", &preds);
    let summary_before = std::fs::read(run1.join("summary.json")).unwrap();
    let table = ok_stdout(&["compare", "--run", run1.to_str().unwrap(), "--predict", &pfile]);
    assert_eq!(summary_before, std::fs::read(run1.join("summary.json")).unwrap());
    let mana = table.lines().find(|l| l.starts_with("mana,")).expect("mana row");
    let cols: Vec<&str> = mana.split(',').collect();
    assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(cols[4].parse::<f64>().unwrap(), 0.0);
    assert_eq!(cols[5].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn seed_override_changes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"q":3,"n_sites":2,"depth":1,"scenario":"haar_subsystem","region_a":[0],"samples":4}"#,
    );
    let out: Vec<_> = ["1", "2"]
        .iter()
        .map(|s| {
            let d = dir.path().join(s);
            ok_stdout(&["run", "--config", &cfg, "--seed", s, "--out", d.to_str().unwrap()]);
            std::fs::read(d.join("samples.csv")).unwrap()
        })
        .collect();
    assert_ne!(out[0], out[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(qmagic(&["measures", "--state", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad_q = write(dir.path(), "b.json", r#"{"q":4,"N":1,"amplitudes":[[1,0],[0,0],[0,0],[0,0]]}"#);
    assert_eq!(qmagic(&["measures", "--state", &bad_q]).status.code(), Some(2));
    let bad_cfg = write(
        dir.path(),
        "c.json",
        r#"{"q":3,"n_sites":2,"depth":1,"scenario":"haar_subsystem","region_a":[5]}"#,
    );
    assert_eq!(qmagic(&["run", "--config", &bad_cfg]).status.code(), Some(2));
    assert_eq!(qmagic(&["enumerate-lagrangian", "--t", "9", "--q", "3"]).status.code(), Some(3));
}

#[test]
fn lagrangian_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lg");
    let v: Value = serde_json::from_str(&ok_stdout(&[
        "enumerate-lagrangian",
        "--t",
        "4",
        "--q",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]))
    .unwrap();
    // Sigma_{4,4} has 80 elements for q = 3.
    assert_eq!(v["count"], 80);
    let basis = std::fs::read_to_string(out.join("lagrangians.csv")).unwrap();
    assert_eq!(basis.lines().count(), 81);
    let dist = std::fs::read_to_string(out.join("distances.csv")).unwrap();
    let rows: Vec<&str> = dist.lines().collect();
    assert_eq!(rows.len(), 81);
    assert!(rows[1..].iter().enumerate().all(|(i, r)| r.split(',').nth(i + 1) == Some("0")));
}
