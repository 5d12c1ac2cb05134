use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn binary() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_schro-maxlab"));
    cmd.env_remove("SCHRO_MAXLAB_THREADS");
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_config(text: &str, out: &Path) -> Output {
    let cfg = write_config(out, "config.json", text);
    binary()
        .args(["run", cfg.to_str().unwrap(), "--out", out.join("out").to_str().unwrap()])
        .output()
        .unwrap()
}

fn summary(out: &Path, stem: &str) -> Value {
    let text = fs::read_to_string(out.join("out").join(format!("{stem}_summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn list_names_all_experiments() {
    let out = binary().arg("list").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("counterexample → Theorem 7"));
    assert!(text.contains("maximal → Theorem 4"));
}

#[test]
fn missing_config_exits_one() {
    let out = binary().args(["run", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}

#[test]
fn usage_error_exits_one() {
    let out = binary().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"experiment": "exponents", "params": {"a": 2, "s": 0.5, "n": 1}, "extra": 1}"#, "extra"),
        (r#"{"experiment": "exponents", "params": {"a": 2, "s": -1, "n": 1}}"#, "params"),
        (r#"{"experiment": "covernum", "set": {"kind": "cantor", "params": {"lambda": 0.3}, "level": 4}, "options": {"k_max": "x"}}"#, "options.k_max"),
        (r#"{"experiment": "maximal", "params": {"a": 2, "s": 0.5, "n": 1}}"#, "grid"),
        (r#"{"experiment": "suffsum", "params": {"a": 2, "s": 2, "n": 1}, "set": {"kind": "interval", "params": {"lo": 0, "hi": 1}, "count": 9}, "tolerances": {"nope": 1}}"#, "tolerances.nope"),
        (r#"{"experiment": "nope"}"#, "experiment"),
    ];
    for (text, field) in cases {
        let out = run_config(text, dir.path());
        assert_eq!(out.status.code(), Some(1), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "expected `{field}` in {err}");
    }
}

#[test]
fn bad_thread_env_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"experiment": "exponents", "params": {"a": 2, "s": 0.5, "n": 1}}"#);
    let out = binary()
        .env("SCHRO_MAXLAB_THREADS", "zero")
        .args(["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let ok = binary()
        .env("SCHRO_MAXLAB_THREADS", "zero")
        .args(["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--threads", "1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn suffsum_unit_interval_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        r#"{"experiment": "suffsum", "params": {"a": 2, "s": 2, "n": 1},
            "set": {"kind": "interval", "params": {"lo": 0, "hi": 1}, "count": 1025}}"#,
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let s = summary(dir.path(), "suffsum");
    assert_eq!(s["metrics"]["verdict"], "converged");
    assert_eq!(s["experiment"], "suffsum");
    assert_eq!(s["inputs_hash"].as_str().unwrap().len(), 64);
    assert!(s["provenance"]["config"].is_object());
}

#[test]
fn failed_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        r#"{"experiment": "suffsum", "params": {"a": 2, "s": 2, "n": 1},
            "set": {"kind": "interval", "params": {"lo": 0, "hi": 1}, "count": 1025},
            "options": {"expect": "diverging"}}"#,
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!summary(dir.path(), "suffsum")["passed"].as_bool().unwrap());
}

#[test]
fn cantor_covering_column_is_powers_of_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        r#"{"experiment": "covernum",
            "set": {"kind": "cantor", "params": {"lambda": 0.3333333333333333}, "level": 10},
            "options": {"base": 3, "k_max": 10}}"#,
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(dir.path().join("out/covernum.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 11);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), k);
        assert_eq!(row[2].parse::<u64>().unwrap(), 1 << k);
    }
}

#[test]
fn same_seed_same_bytes() {
    let config = r#"{"experiment": "propagate", "params": {"a": 1.5, "s": 1, "n": 1},
        "grid": {"dim": 1, "period": 6.283185307179586, "mode_bound": 24}, "trials": 3, "seed": 9}"#;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run_config(config, a.path()).status.code(), Some(0));
    assert_eq!(run_config(config, b.path()).status.code(), Some(0));
    let read = |d: &Path| fs::read(d.join("out/propagate.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let (sa, sb) = (summary(a.path(), "propagate"), summary(b.path(), "propagate"));
    assert_eq!(sa["inputs_hash"], sb["inputs_hash"]);
}

#[test]
fn output_field_used_when_no_flag() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config");
    let text = format!(
        r#"{{"experiment": "exponents", "params": {{"a": 2, "s": 0.5, "n": 1}}, "output": {:?}}}"#,
        target.to_str().unwrap()
    );
    let cfg = write_config(dir.path(), "c.json", &text);
    let out = binary().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("exponents_summary.json").exists());
}
