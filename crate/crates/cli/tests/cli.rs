use std::fs;
use std::process::{Command, Output};

fn metactl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metactl"))
        .args(args)
        .env_remove("METACTL_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const MODELS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models");
const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

#[test]
fn validate_shipped_model_is_ok() {
    let o = metactl(&["validate", &format!("{MODELS}/pyramid.archmodel")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with(": ok\n"));
}

#[test]
fn validate_warning_exits_zero() {
    let o = metactl(&["validate", &format!("{FIXTURES}/unsatisfiable.archmodel")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning statically unsatisfiable NFR"));
}

#[test]
fn validate_error_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.archmodel");
    fs::write(&p, "system bad {\n  function f;\n  design d realizes f { requires ghost; utility = 0.5; }\n}\n").unwrap();
    let o = metactl(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("3:"), "{}", stdout(&o));
    assert!(stdout(&o).contains("ghost"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(metactl(&[]).status.code(), Some(2));
    assert_eq!(metactl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(metactl(&["mission", "--clutter", "extreme"]).status.code(), Some(2));
    assert_eq!(metactl(&["mission", "--config", "C9"]).status.code(), Some(2));
    assert_eq!(metactl(&["matrix", "--seeds", "0"]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    assert_eq!(metactl(&["--help"]).status.code(), Some(0));
}

#[test]
fn generated_model_matches_shipped_file() {
    let o = metactl(&["generate-nav-model"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), fs::read_to_string(format!("{MODELS}/navigation.archmodel")).unwrap());
}

#[test]
fn pyramid_passes() {
    let o = metactl(&["pyramid"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{text}");
    assert!(text.contains("tag_detect_lowlight"));
    assert!(text.contains("single_arm_with_move"));
}

#[test]
fn mission_reports_metrics_and_is_repeatable() {
    let args = ["mission", "--config", "C7", "--clutter", "high", "--power", "50", "--mode", "mros", "--seed", "7"];
    let a = metactl(&args);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    assert!(text.contains("outcome=complete"), "{text}");
    let count: u32 = text.split("reconfig_count=").nth(1).unwrap().trim().parse().unwrap();
    assert!(count >= 1, "{text}");
    assert_eq!(text, stdout(&metactl(&args)));
}

#[test]
fn seed_comes_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_metactl"))
        .args(["mission", "--config", "C1", "--mode", "base"])
        .env("METACTL_SEED", "42")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("seed=42"));
}

#[test]
fn summarize_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("runs.csv");
    fs::write(&p, "not,a,run,file\n").unwrap();
    assert_eq!(metactl(&["summarize", p.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(metactl(&["summarize", "/nonexistent/runs.csv"]).status.code(), Some(1));
}

#[test]
fn reason_prints_trace_and_status() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("kb.jsonl");
    fs::write(
        &p,
        r#"{"t": 0, "kind": "model", "name": "pyramid"}
{"t": 0, "kind": "grounding", "objective": "o_build", "design": "dual_arm"}
{"t": 5.0, "kind": "component_status", "name": "arm_right", "status": "error"}
"#,
    )
    .unwrap();
    let o = metactl(&["reason", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("R1 c=arm_right d=dual_arm"), "{text}");
    assert!(text.contains("o_build [dual_arm]: in_error"), "{text}");
}

#[test]
fn matrix_resumes_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let csv_s = csv.to_str().unwrap();
    let first = metactl(&["matrix", "--seeds", "1", "--out", csv_s]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).contains("0 rows present, 168 written"), "{}", stdout(&first));
    let second = metactl(&["matrix", "--seeds", "1", "--out", csv_s]);
    assert!(stdout(&second).contains("168 rows present, 0 written"));
    let figs = dir.path().join("figs");
    let o = metactl(&["summarize", csv_s, "--fig-dir", figs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["fig6_safety_violation.csv", "fig7_energy_violation.csv", "fig8_mission_time.csv"] {
        assert!(figs.join(f).exists(), "{f}");
    }
}
