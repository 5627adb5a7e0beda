use std::path::Path;
use std::process::{Command, Output};

fn bcplab(args: &[&str], jobs_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bcplab"));
    cmd.args(args).env_remove("BCPLAB_JOBS");
    if let Some(j) = jobs_env {
        cmd.env("BCPLAB_JOBS", j);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn strip_wall_time(text: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    v["aggregates"]["wall_time_ms"] = serde_json::Value::Null;
    v.to_string()
}

#[test]
fn shortcuts_pass() {
    for cmd in ["topology", "op", "transfer"] {
        let out = bcplab(&[cmd, "--seed", "1"], None);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["verdict"], "pass");
        assert_eq!(report["config"]["seed"], 1);
    }
}

#[test]
fn falsified_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "f.json",
        r#"{"scenario":"ck_falsify","params":{"n":6,"dead_node":2}}"#,
    );
    let out = bcplab(&["run", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "falsified");
    assert_eq!(report["details"]["witness_defeats_all"], true);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"scenario":"no_such_scenario"}"#,
        r#"{"scenario":"ck_cover","params":{"lambda":2.0}}"#,
        r#"{"scenario":"ck_cover","params":{"colour":1}}"#,
        r#"{"scenario":"hilbert","params":{"delta":-1}}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("{i}.json"), text);
        let out = bcplab(&["run", "--config", &cfg], None);
        assert_eq!(out.status.code(), Some(2), "{text}");
    }
    let out = bcplab(&["run", "--config", "/nonexistent/cfg.json"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = bcplab(&["run"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_reproduce_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ck.json",
        r#"{"scenario":"ck_cover","params":{"n":16,"mode":"lipschitz","Lambda":3.0,"trials":300},"seed":42}"#,
    );
    let a = bcplab(&["run", "--config", &cfg, "--jobs", "1"], None);
    let b = bcplab(&["run", "--config", &cfg, "--jobs", "1"], Some("3"));
    let out = dir.path().join("r.json");
    let c = bcplab(&["run", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(c.stdout.is_empty());
    let from_file = std::fs::read_to_string(&out).unwrap();
    let a = strip_wall_time(std::str::from_utf8(&a.stdout).unwrap());
    assert_eq!(a, strip_wall_time(std::str::from_utf8(&b.stdout).unwrap()));
    assert_eq!(a, strip_wall_time(&from_file));
}

#[test]
fn csv_rows_per_trial() {
    let out = bcplab(&["ck", "--format", "csv", "--seed", "3"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("trial,part,status,ball_index,distance,radius,margin")
    );
    assert_eq!(lines.count(), 10_000);
}
