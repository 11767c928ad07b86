//! End-to-end tests of the `wapsim` binary: subcommands, output files, and
//! exit codes (0 ok, 1 domain error, 2 I/O error).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wapsim"))
}

fn canonical_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/canonical.json")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn run_writes_stats_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run"])
        .arg(canonical_path())
        .args(["--duration", "5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let stats = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    assert!(stats.starts_with("node,parameter,value\n"));
    let events = std::fs::read_to_string(dir.path().join("events.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&events).unwrap();
    assert_eq!(parsed["schema_version"], 1);
    assert_eq!(parsed["duration_ms"], 5_000);
}

#[test]
fn same_seed_runs_are_byte_identical() {
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &dirs {
        let out = bin()
            .args(["run"])
            .arg(canonical_path())
            .args(["--seed", "7", "--duration", "20", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert_exit(&out, 0);
    }
    for name in ["stats.csv", "events.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical invocations");
    }
}

#[test]
fn compare_writes_report_ending_with_score() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["compare"])
        .arg(canonical_path())
        .args(["--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_exit(&out, 0);
    for name in [
        "stats_without_wap.csv",
        "stats_with_wap.csv",
        "events_without_wap.json",
        "events_with_wap.json",
        "comparison.csv",
        "report.txt",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let last = report.lines().last().unwrap();
    assert!(
        last.starts_with("QoS score: ") && (last.ends_with('%') || last.ends_with("n/a")),
        "unexpected final line: {last}"
    );
    let comparison = std::fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert_eq!(comparison.lines().next(), Some("parameter,without,with,classification"));
    assert_eq!(comparison.lines().count(), 18);
}

#[test]
fn compare_epsilon_flag_changes_classification() {
    let dir = tempfile::tempdir().unwrap();
    // With a huge epsilon every change is insignificant and the score is n/a.
    let out = bin()
        .args(["compare"])
        .arg(canonical_path())
        .args(["--duration", "5", "--epsilon", "1000000", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(report.lines().last(), Some("QoS score: n/a"));
}

#[test]
fn validate_accepts_canonical_scene() {
    let out = bin().args(["validate"]).arg(canonical_path()).output().unwrap();
    assert_exit(&out, 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("OK"));
}

#[test]
fn fixtures_paper_table_prints_published_score() {
    let out = bin().args(["fixtures", "--paper-table"]).output().unwrap();
    assert_exit(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().last(), Some("QoS score: 66.67%"));
    assert!(stdout.contains("improved: 8  undesirable: 4  insignificant: 5"));
}

#[test]
fn exit_code_1_for_invalid_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    // Structurally valid JSON failing validation: duplicate node ids.
    let mut scenario: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(canonical_path()).unwrap()).unwrap();
    scenario["nodes"][1]["id"] = serde_json::json!(1);
    std::fs::write(&path, scenario.to_string()).unwrap();
    let out = bin().args(["validate"]).arg(&path).output().unwrap();
    assert_exit(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate node id"));

    // Malformed JSON is also a domain (parse) error.
    std::fs::write(&path, "{ not json").unwrap();
    let out = bin().args(["validate"]).arg(&path).output().unwrap();
    assert_exit(&out, 1);
}

#[test]
fn exit_code_2_for_missing_file() {
    let out = bin()
        .args(["run", "/nonexistent/scenario.json"])
        .output()
        .unwrap();
    assert_exit(&out, 2);
}

#[test]
fn fixtures_without_selection_is_domain_error() {
    let out = bin().args(["fixtures"]).output().unwrap();
    assert_exit(&out, 1);
}
