use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn amenable(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amenable"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const FULL_SHIFT_SITE: &str = r#"{
    "group": {"dim": 1},
    "folner": {"kind": "corner", "n_min": 1, "n_max": 12},
    "subshift": {"kind": "full", "alphabet": ["0", "1"]},
    "potential": {"kind": "single_site", "values": [0.0, 1.0]}
}"#;

#[test]
fn pressure_writes_versioned_json_and_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "p.json", FULL_SHIFT_SITE);
    let out = tmp.path().join("out");
    let o = amenable(&["pressure", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j = read_json(&out.join("pressure.json"));
    assert_eq!(j["schema"], 1);
    let expect = (1.0 + 1f64.exp()).ln();
    assert!((j["pressure"]["limit"].as_f64().unwrap() - expect).abs() < 1e-12);
    assert_eq!(j["pressure"]["method"], "transfer_matrix");
    assert_eq!(j["pressure"]["series"].as_array().unwrap().len(), 12);
    let csv = fs::read_to_string(out.join("pressure.csv")).unwrap();
    assert!(csv.starts_with("n,size,log_z_per_site,method\n"));
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "gm.json",
        r#"{
            "group": {"dim": 1},
            "folner": {"kind": "corner", "n_min": 2, "n_max": 10},
            "subshift": {"kind": "golden_mean"},
            "setmap": {"rule": "boundary_perturbed",
                       "v": {"kind": "pair", "values": [[0.1, 0.4], [-0.3, 0.0]]},
                       "u": {"kind": "constant", "value": 0.5}, "k": [[0], [1]]},
            "options": {"family": {"family": "markov", "restarts": 3}}
        }"#,
    );
    for cmd in ["pressure", "varprin"] {
        let a = tmp.path().join(format!("{cmd}_a"));
        let b = tmp.path().join(format!("{cmd}_b"));
        for d in [&a, &b] {
            let o = amenable(&[cmd, "--config", &cfg, "--out", d.to_str().unwrap(), "--seed", "11"]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        for entry in fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(
                fs::read(a.join(&name)).unwrap(),
                fs::read(b.join(&name)).unwrap(),
                "{name:?}"
            );
        }
    }
}

#[test]
fn invalid_config_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "bad.json",
        r#"{"group": {"dim": 1}, "rep": {"kind": "identity", "dim": 1}, "subshift": {"kind": "golden_mean"}}"#,
    );
    let out = tmp.path().join("out");
    let o = amenable(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = amenable(&["pressure", "--config", &cfg.replace("bad", "missing")]);
    assert_eq!(o.status.code(), Some(2));

    let good = config(tmp.path(), "p.json", FULL_SHIFT_SITE);
    let o = amenable(&[
        "pressure",
        "--config",
        &good,
        "--tol",
        "-1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn failed_precondition_exits_3_with_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "osc.json",
        r#"{
            "group": {"dim": 1},
            "folner": {"n_min": 4, "n_max": 64},
            "rep": {"kind": "identity", "dim": 1},
            "setmap": {"rule": "custom", "name": "size_profile", "profile": "sin_log",
                       "value": [1.0], "amplitude": 200.0}
        }"#,
    );
    let out = tmp.path().join("out");
    let o = amenable(&["realize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gap"));
    assert!(!out.exists());
}

#[test]
fn out_of_hypothesis_target_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "rel.json",
        r#"{
            "group": {"dim": 1},
            "folner": {"n_min": 4, "n_max": 32},
            "rep": {"kind": "identity", "dim": 2},
            "setmap": {"rule": "additive", "v": [1.0, 2.0]},
            "options": {"target": [[1.0, 0.0]], "tol": 1e-6}
        }"#,
    );
    let o = amenable(&["realize", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["dichotomy"]["class"], "out_of_hypothesis");
}

#[test]
fn pattern_cap_exits_4_with_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "cap.json",
        r#"{
            "group": {"dim": 1},
            "folner": {"kind": "corner", "n_min": 20, "n_max": 26},
            "subshift": {"kind": "full", "alphabet": ["0", "1"], "param_window": [[0]]},
            "setmap": {"rule": "custom", "name": "constant", "value": {"kind": "zero"}}
        }"#,
    );
    let o = amenable(&["pressure", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("count 33554432"));
}

#[test]
fn folner_defects_match_box_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "f.json",
        r#"{"group": {"dim": 2}, "folner": {"n_min": 2, "n_max": 8, "generators": [[1, 0], [0, 1], [0, 0]]},
            "rep": {"kind": "identity", "dim": 1}}"#,
    );
    let out = tmp.path().join("out");
    let o = amenable(&["folner", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("folner.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    for row in rdr.records() {
        let row = row.unwrap();
        let n: f64 = row[0].parse().unwrap();
        let expect = 2.0 / (2.0 * n + 1.0);
        assert!((row[2].parse::<f64>().unwrap() - expect).abs() < 1e-15);
        assert!((row[3].parse::<f64>().unwrap() - expect).abs() < 1e-15);
        assert_eq!(row[4].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn analyze_flags_non_equivariant_maps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "ne.json",
        r#"{"group": {"dim": 1}, "folner": {"n_min": 4, "n_max": 24},
            "rep": {"kind": "rotation", "angle": 1.2566370614359172},
            "setmap": {"rule": "custom", "name": "constant", "value": [1.0, 0.0]}}"#,
    );
    let o = amenable(&["analyze", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["equivariant"], false);
    assert!(j["aa"].is_null());

    let additive = cfg.replace("ne.json", "add.json");
    fs::write(
        &additive,
        r#"{"group": {"dim": 1}, "folner": {"n_min": 4, "n_max": 24},
            "rep": {"kind": "rotation", "angle": 1.2566370614359172},
            "setmap": {"rule": "additive", "v": [1.0, 0.0]}}"#,
    )
    .unwrap();
    let o = amenable(&["analyze", "--config", &additive]);
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["equivariant"], true);
    assert_eq!(j["aa"], true);
    assert!(j["aa_report"]["gap"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn varprin_golden_mean_markov_family() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "vp.json",
        r#"{"group": {"dim": 1}, "folner": {"kind": "corner", "n_min": 1, "n_max": 12},
            "subshift": {"kind": "golden_mean"}, "potential": {"kind": "zero"},
            "options": {"family": {"family": "markov"}}}"#,
    );
    let o = amenable(&["varprin", "--config", &cfg, "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j: Value = serde_json::from_slice(&o.stdout).unwrap();
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!((j["certificate"]["family_sup"].as_f64().unwrap() - golden).abs() < 1e-6);
    assert_eq!(j["certificate"]["certified"], true);
}
