use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nilalg(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilalg")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn built(args: &[&str]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut all = vec!["build"];
    all.extend_from_slice(args);
    let o = nilalg(dir.path(), &all);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

#[test]
fn build_writes_every_level() {
    let dir = built(&[]);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let levels = m["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 11);
    for l in levels {
        assert!(dir.path().join(l["file"].as_str().unwrap()).exists());
    }
}

#[test]
fn toy_schedule_case_sequence() {
    let dir = built(&["--schedule", "toy:2", "--engine", "dense", "--max-level", "4"]);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let cases: Vec<u64> = m["levels"].as_array().unwrap().iter().map(|l| l["case"].as_u64().unwrap()).collect();
    assert_eq!(cases, [0, 2, 1, 3, 2]);
    assert_eq!(code(&nilalg(dir.path(), &["verify", "--suite", "8props"])), 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&nilalg(dir.path(), &["build", "--engine", "dense", "--max-level", "20"])), 3);
    assert_eq!(code(&nilalg(dir.path(), &["verify"])), 2);
    assert_eq!(code(&nilalg(dir.path(), &["build", "--suite", "nope"])), 2);
    assert_eq!(code(&nilalg(dir.path(), &["frobnicate"])), 2);
    assert_eq!(code(&nilalg(dir.path(), &["--help"])), 0);
}

#[test]
fn suites_pass_and_reports_are_reproducible() {
    let dir = built(&["--max-level", "6"]);
    for suite in ["8props", "ideal", "engines"] {
        let args = ["verify", "--suite", suite, "--max-degree", "64", "--seed", "3"];
        let first = nilalg(dir.path(), &args);
        assert_eq!(code(&first), 0, "{suite}");
        let report = dir.path().join(format!("report_{suite}.json"));
        let a = fs::read(&report).unwrap();
        assert_eq!(code(&nilalg(dir.path(), &args)), 0);
        assert_eq!(a, fs::read(&report).unwrap(), "{suite} report changed between runs");
        assert_eq!(a, first.stdout);
    }
}

#[test]
fn tampered_level_is_located() {
    let dir = built(&["--max-level", "4"]);
    let path = dir.path().join("levels/level_03.json");
    let text = fs::read_to_string(&path).unwrap().replace("xxxxxxxy", "xxxxxxyx");
    fs::write(&path, text).unwrap();
    let o = nilalg(dir.path(), &["verify", "--suite", "engines"]);
    assert_eq!(code(&o), 1);
    let recs = stdout_json(&o);
    let failed: Vec<&Value> = recs.as_array().unwrap().iter().filter(|r| r["status"] == "fail").collect();
    assert!(!failed.is_empty());
    assert_eq!(failed[0]["parameters"]["level"], 3);
}

#[test]
fn tampered_schedule_is_rejected() {
    let dir = built(&["--max-level", "2"]);
    let path = dir.path().join("schedule.json");
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text + " ").unwrap();
    assert_eq!(code(&nilalg(dir.path(), &["verify", "--suite", "8props"])), 2);
}

#[test]
fn probe_examples() {
    let dir = built(&["--max-level", "4"]);
    let o = nilalg(dir.path(), &["probe", "--poly", "x", "--exponent", "5"]);
    assert_eq!(code(&o), 0);
    let j = stdout_json(&o);
    assert_eq!(j["in_e"], false);
    assert_eq!(j["components"][0]["offending"][0], "xxxxx");
    let j = stdout_json(&nilalg(dir.path(), &["probe", "--poly", "yy"]));
    assert_eq!(j["in_e"], true);
    let j = stdout_json(&nilalg(dir.path(), &["probe", "--poly", "xy+yx", "--exponent", "2"]));
    assert_eq!(j["in_e"], true);
}

#[test]
fn hilbert_and_gk() {
    let dir = built(&["--max-level", "4"]);
    let o = nilalg(dir.path(), &["hilbert", "--max-degree", "4", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "n,dim_quotient,cumulative\n1,2,2\n2,3,5\n3,4,9\n4,5,14\n");
    assert!(dir.path().join("hilbert.json").exists());
    let o = nilalg(dir.path(), &["gk", "--max-degree", "1024", "--window", "64,1024"]);
    assert_eq!(code(&o), 0);
    let j = stdout_json(&o);
    let slope = j["slope"].as_f64().unwrap();
    assert!(slope > 1.9 && slope < 2.1, "{slope}");
    assert_eq!(code(&nilalg(dir.path(), &["gk", "--max-degree", "64", "--window", "64,8"])), 2);
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"max_level": 3, "schedule": "default"}"#).unwrap();
    let o = nilalg(dir.path(), &["build", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["levels"].as_array().unwrap().len(), 4);
}
