use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use psido_cli::emit::{parse_report, report_json, summary_csv};
use psido_core::VerificationReport;
use serde_json::Value;

fn psido(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psido")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn without_timings(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let out = psido(&["run", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scenario"));
    assert_eq!(psido(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn invalid_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"schema_version": 1, "bogus": 1}"#,
        r#"{"schema_version": 2}"#,
        r#"{"schema_version": 1, "tolerance_overrides": {"nope": 1.0}}"#,
        r#"{"schema_version": 1, "N": 100}"#,
        r#"{"schema_version": 1, "scenario": "cv-bound"}"#,
        r#"not json"#,
    ] {
        let cfg = write_config(dir.path(), body);
        let out = psido(&["run", "fourier-unitarity", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{body}");
    }
    let out = psido(&["run", "fourier-unitarity", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn passing_run_writes_report_summary_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = psido(&["run", "fourier-unitarity", "--out", out_dir.to_str().unwrap(), "--emit-plots"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(out_dir.join("report.json")).unwrap();
    let report = parse_report(&text).unwrap();
    assert!(report.pass);
    assert_eq!(report.scenario, "fourier-unitarity");
    assert_eq!(report.config["N"], 256);
    assert_eq!(report_json(&report).unwrap(), text);
    let parsed: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&str> = parsed.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["scenario", "artifact_version", "config", "metrics", "diagnostics", "pass", "timings"]);

    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("name,value,threshold,comparison,pass"));
    assert_eq!(lines.count(), report.metrics.len());

    let plot = fs::read_to_string(out_dir.join("plots/inner_deviation.csv")).unwrap();
    assert!(plot.starts_with("x,value,series\n"));
    assert_eq!(plot.lines().count(), 51);
}

#[test]
fn report_goes_to_stdout_without_an_output_directory() {
    let out = psido(&["run", "fourier-unitarity"]);
    assert_eq!(out.status.code(), Some(0));
    let report = parse_report(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.pass);
}

#[test]
fn output_path_in_the_config_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-config");
    let body = format!(r#"{{"schema_version": 1, "output_path": {:?}}}"#, target.to_str().unwrap());
    let cfg = write_config(dir.path(), &body);
    assert_eq!(psido(&["run", "fourier-unitarity", "--config", &cfg]).status.code(), Some(0));
    assert!(target.join("report.json").exists());
}

#[test]
fn failing_metric_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "tolerance_overrides": {"inner_deviation": 0.0}}"#);
    let out_dir = dir.path().join("out");
    let out = psido(&["run", "fourier-unitarity", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = parse_report(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert!(!report.pass);
    assert!(!report.metric("inner_deviation").unwrap().pass);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL inner_deviation"));
}

#[test]
fn convergence_failure_exits_with_three_and_keeps_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "symbol": "random"}"#);
    let out_dir = dir.path().join("out");
    let out = psido(&["run", "adjoint-symbol", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--emit-plots"]);
    assert_eq!(out.status.code(), Some(3));
    let text = fs::read_to_string(out_dir.join("report.json")).unwrap();
    let report = parse_report(&text).unwrap();
    let m = report.metric("extrapolation").unwrap();
    assert!(!m.pass && m.value.is_nan());
    assert!(text.contains(r#""value": null"#));
    assert!(report.diagnostics.iter().any(|d| d.contains("extrapolants differ")));
    assert!(out_dir.join("plots/epsilon_trace.csv").exists());
}

#[test]
fn repeated_runs_are_identical_except_timings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "seed": 7, "trial_count": 5}"#);
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        assert_eq!(psido(&["run", "adjoint-symbol", "--config", &cfg, "--out", out_dir.to_str().unwrap()]).status.code(), Some(0));
        fs::read_to_string(out_dir.join("report.json")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(without_timings(&a), without_timings(&b));
    let strip = |t: &str| t[..t.find("\"timings\"").unwrap()].to_string();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn empty_reports_are_not_emitted() {
    let report = VerificationReport::new("empty");
    assert!(report_json(&report).is_err());
    assert_eq!(summary_csv(&report).unwrap().lines().count(), 1);
}

#[test]
fn list_names_every_scenario() {
    let out = psido(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for sc in psido_cli::config::Scenario::ALL {
        assert!(text.contains(sc.name()));
    }
}
