use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ibn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibn"))
        .args(args)
        .env("IBN_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = ibn(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ibn(dir.path(), &["estimate-ibn", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn too_deep_schedule_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = ibn(dir.path(), &["estimate-ibn", "--family", "seq", "--depth", "8", "--schedule", "16"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn memory_cap_aborts_with_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = ibn(dir.path(), &["--memory-cap", "1000", "nathanson", "--depth", "30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("memory cap"));
}

#[test]
fn bad_config_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"command\": \"walk\",\n  \"seed\": [1]\n}\n").unwrap();
    let out = ibn(dir.path(), &["replay", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn empty_report_is_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    fs::create_dir(&runs).unwrap();
    ok(dir.path(), &["report", runs.to_str().unwrap()]);
    let table = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(table.lines().count(), 1);
}

#[test]
fn report_keys_rows_by_family_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "1", "estimate-ibn", "--family", "seq", "--depth", "64", "--out", "a.csv"]);
    ok(d, &["--seed", "2", "estimate-ibn", "--family", "seq", "--depth", "64", "--out", "b.csv"]);
    ok(d, &["--seed", "1", "percolate", "--family", "seq", "--depth", "64", "--lambda", "0.3,0.7", "--out", "c.csv"]);
    fs::write(d.join("stray.csv"), "x\n1\n").unwrap();
    let out = ibn(d, &["report", d.to_str().unwrap(), "--out", "sub/summary.csv"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stray.csv"));
    let table = fs::read_to_string(d.join("sub/summary.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2, "{table}");
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(&first[..2], ["seq", "1"]);
    assert!(rows[0].matches('[').count() == 2, "{table}");
    assert!(rows[1].starts_with("seq,2,"));
}

#[test]
fn manifest_timestamp_sits_on_its_own_line() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["nathanson", "--depth", "12"]);
    let text = fs::read_to_string(dir.path().join("nathanson.csv.manifest.json")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[lines.len() - 2].trim_start().starts_with("\"timestamp\""));
    assert_eq!(text.matches("timestamp").count(), 1);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn replay_from_manifest_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "5", "walk", "--family", "seq", "--depth", "128", "--lambda", "0.4", "--trials", "300", "--step-cap", "10000"]);
    let first = fs::read(d.join("walk.csv")).unwrap();
    fs::rename(d.join("walk.csv.manifest.json"), d.join("m.json")).unwrap();
    fs::remove_file(d.join("walk.csv")).unwrap();
    ok(d, &["replay", d.join("m.json").to_str().unwrap()]);
    assert_eq!(fs::read(d.join("walk.csv")).unwrap(), first);
}
