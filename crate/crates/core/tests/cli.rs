use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn schmidt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schmidt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn windim_demo_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = schmidt(&["game", "windim-demo", "--N", "1", "--rounds", "30", "--seed", "7", "--out", path_str(p)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);

    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["spec"]["command"], "game windim-demo");
    assert_eq!(v["spec"]["seed"], 7);
    assert_eq!(v["black_failures"], 0);
    assert_eq!(v["limit_misses_zero"], 0);
}

#[test]
fn csv_headers_carry_units() {
    let out = schmidt(&["cf", "cylinders", "--alphabet", "1,3", "--depth", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    for col in header.split(',') {
        assert!(col.contains('[') && col.ends_with(']'), "column `{col}` has no unit");
    }
    assert_eq!(lines.count(), 4);
}

#[test]
fn invalid_input_exits_two_with_a_message() {
    for args in [
        &["game", "windim-demo", "--games", "0"][..],
        &["cf", "cylinders", "--alphabet", "1,x"],
        &["cf", "cylinders", "--depth", "0"],
        &["no-such-command"],
    ] {
        let out = schmidt(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?} printed nothing to stderr");
    }
}

#[test]
fn ratio_check_passes() {
    let out = schmidt(&["cf", "ratio-check", "--depth", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["within_bounds"], true);
}

#[test]
fn run_matches_direct_invocation() {
    let dir = tempfile::tempdir().unwrap();
    let direct = dir.path().join("direct.json");
    let stored = dir.path().join("stored.json");
    let out = schmidt(&["game", "windim-demo", "--rounds", "12", "--seed", "3", "--out", path_str(&direct)]);
    assert_eq!(out.status.code(), Some(0));

    let spec = dir.path().join("spec.json");
    let body = serde_json::json!({
        "command": ["game", "windim-demo", "--rounds", "12"],
        "seed": 3,
        "out": path_str(&stored),
    });
    std::fs::write(&spec, body.to_string()).unwrap();
    let out = schmidt(&["run", path_str(&spec)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&direct).unwrap(), std::fs::read(&stored).unwrap());
}

#[test]
fn run_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"command": ["cf", "cylinders"], "colour": "red"}"#).unwrap();
    let out = schmidt(&["run", path_str(&spec)]);
    assert_eq!(out.status.code(), Some(2));
}
