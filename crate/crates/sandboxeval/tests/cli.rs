//! End-to-end tests of the command-line surface and its exit-code contract:
//! 0 success/conform, 1 nonconform, 2 usage or runtime failure.

mod common;

use std::path::PathBuf;

use common::{run_cli, suite_lock, write_config, LoopbackNet};
use sandboxeval::model::Outcome;
use sandboxeval::report::parse_structured;

fn tmp(tag: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(tag);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Scratch roots must sit outside every critical path (the build tree lives
/// under one on this host), so they go to the system temp directory.
fn scratch(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("sandboxeval-cli-{tag}-{}", std::process::id()))
}

/// Minimal config disabling the sentinel: on this host the default roots
/// include directories the test harness itself keeps writing to, which the
/// sentinel would rightly flag. Sentinel behavior has its own coverage.
fn quiet_config(tag: &str) -> PathBuf {
    let dir = tmp(tag);
    write_config(&dir, &serde_json::json!({ "sentinel_roots": [] }))
}

#[test]
fn list_emits_all_probes() {
    let out = run_cli(&["list"]);
    assert_eq!(out.status, 0);
    assert_eq!(out.stdout.lines().count(), 51);
    assert!(out.stderr.contains("51 probes"));
}

#[test]
fn list_filters_by_category() {
    let out = run_cli(&["list", "--category", "expose-metadata"]);
    assert_eq!(out.status, 0);
    assert_eq!(out.stdout.lines().count(), 3);
}

#[test]
fn list_rejects_unknown_category_with_usage_error() {
    let out = run_cli(&["list", "--category", "nosuch"]);
    assert_eq!(out.status, 2);
}

#[test]
fn list_rejects_unknown_probe_id() {
    let out = run_cli(&["list", "--probe", "sysinfo.platfrom"]);
    assert_eq!(out.status, 2);
    assert!(out.stderr.contains("sysinfo.platfrom"));
}

#[test]
fn run_single_probe_produces_parseable_report() {
    let _ = tmp("run-single");
    let quiet = quiet_config("run-single");
    let out = run_cli(&[
        "run",
        "--config",
        quiet.to_str().unwrap(),
        "--probe",
        "sysinfo.locale",
        "--scratch",
        scratch("run-single").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let report = parse_structured(out.stdout.as_bytes()).expect("stdout parses as a report");
    assert_eq!(report.results.len(), 1);
    assert_eq!(report.results[0].probe.as_str(), "sysinfo.locale");
}

#[test]
fn run_rejects_scratch_inside_a_critical_path() {
    let out = run_cli(&["run", "--probe", "sysinfo.locale", "--scratch", "/usr/bin/scratch"]);
    assert_eq!(out.status, 2);
    assert!(out.stderr.contains("overlaps"), "{}", out.stderr);
    assert!(!PathBuf::from("/usr/bin/scratch").exists(), "scratch must not be created");
}

#[test]
fn run_fails_before_probing_when_report_path_is_unwritable() {
    let out = run_cli(&[
        "run",
        "--probe",
        "sysinfo.locale",
        "--report",
        "/nonexistent-dir/report.json",
    ]);
    assert_eq!(out.status, 2);
    assert!(out.stderr.contains("not writable"), "{}", out.stderr);
}

#[test]
fn run_report_file_and_table_output() {
    let base = tmp("run-report");
    let report_path = base.join("report.json");
    let quiet = quiet_config("run-report-quiet");
    let out = run_cli(&[
        "run",
        "--config",
        quiet.to_str().unwrap(),
        "--probe",
        "sysinfo.platform",
        "--scratch",
        scratch("run-report").to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status, 0, "{}", out.stderr);
    assert!(out.stdout.contains("Expose System"), "table goes to stdout: {}", out.stdout);
    let bytes = std::fs::read(&report_path).unwrap();
    let report = parse_structured(&bytes).unwrap();
    assert_eq!(report.results.len(), 1);
}

#[test]
fn check_missing_profile_file_is_a_runtime_error() {
    let out = run_cli(&["check", "--profile", "missing.json", "--probe", "sysinfo.locale"]);
    assert_eq!(out.status, 2);
}

#[test]
fn check_conform_run_exits_zero() {
    let _ = tmp("check-conform");
    let quiet = quiet_config("check-conform-quiet");
    let out = run_cli(&[
        "check",
        "--profile",
        "unconfined",
        "--config",
        quiet.to_str().unwrap(),
        "--probe",
        "sysinfo.locale",
        "--scratch",
        scratch("check-conform").to_str().unwrap(),
    ]);
    assert_eq!(out.status, 0, "stdout: {} stderr: {}", out.stdout, out.stderr);
    assert!(out.stdout.contains("overall=CONFORM"));
}

#[test]
fn check_flags_unexpected_egress_as_violations() {
    let _guard = suite_lock();
    let base = tmp("check-egress");
    let net = LoopbackNet::spawn();
    let config_path = write_config(
        &base,
        &serde_json::json!({
            "selection": { "category": "external-communication" },
            "scratch_root": scratch("check-egress"),
            "sentinel_roots": [],
            "per_probe_timeout_secs": 15,
            "budget": { "timeout_seconds": 2.0 },
            "endpoints": net.endpoints(),
        }),
    );
    // egress reaches the fixtures, so a hardened expectation must fail
    let out = run_cli(&["check", "--profile", "dyff-hardened", "--config", config_path.to_str().unwrap()]);
    net.shutdown();
    assert_eq!(out.status, 1, "stdout: {} stderr: {}", out.stdout, out.stderr);
    for probe in ["net.ping", "net.dns_query", "net.http", "net.ftp", "net.ssh", "net.smtp"] {
        assert!(
            out.stdout.contains(&format!("VIOLATION {probe}")),
            "missing violation for {probe}: {}",
            out.stdout
        );
    }
    assert!(out.stdout.contains("overall=NONCONFORM"));
}

#[test]
fn run_honors_scratch_env_var() {
    let _ = tmp("env-scratch");
    let scratch = scratch("env-scratch").join("from-env");
    let quiet = quiet_config("env-scratch-quiet");
    let out = common::run_cli_with(
        &[
            "run",
            "--config",
            quiet.to_str().unwrap(),
            "--probe",
            "fs.structure.create",
            "--mode",
            "direct",
            "--format",
            "json",
        ],
        &[("SANDBOXEVAL_SCRATCH", scratch.to_str().unwrap())],
        None,
    );
    assert_eq!(out.status, 0, "{}", out.stderr);
    let report = parse_structured(out.stdout.as_bytes()).unwrap();
    assert_eq!(report.results[0].outcome, Outcome::Accessed);
    // scratch-active create leaves its fixture behind, proving the env
    // var's directory was used
    assert!(scratch.join("fs_structure_create").join("created_file").exists());
}

#[test]
fn mode_override_switches_fs_probe_to_scratch_active() {
    let _ = tmp("mode-override");
    let quiet = quiet_config("mode-override-quiet");
    let out = run_cli(&[
        "run",
        "--config",
        quiet.to_str().unwrap(),
        "--probe",
        "fs.content.write",
        "--mode",
        "direct",
        "--scratch",
        scratch("mode-override").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let report = parse_structured(out.stdout.as_bytes()).unwrap();
    let result = &report.results[0];
    assert_eq!(result.mode_used.as_str(), "direct");
    assert_eq!(result.outcome, Outcome::Accessed);
}

#[test]
fn config_file_values_survive_flag_overrides() {
    let base = tmp("config-merge");
    let config_path = write_config(
        &base,
        &serde_json::json!({
            "selection": { "ids": ["sysinfo.platform", "sysinfo.locale"] },
            "scratch_root": scratch("config-merge"),
            "sentinel_roots": [],
            "max_depth": 3
        }),
    );
    // the flag narrows the file's two-probe selection down to one
    let out = run_cli(&[
        "run",
        "--config",
        config_path.to_str().unwrap(),
        "--probe",
        "sysinfo.locale",
        "--format",
        "json",
    ]);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let report = parse_structured(out.stdout.as_bytes()).unwrap();
    assert_eq!(report.results.len(), 1);
    assert_eq!(report.results[0].probe.as_str(), "sysinfo.locale");
}

#[test]
fn malformed_config_file_is_rejected() {
    let base = tmp("bad-config");
    let path = base.join("config.json");
    std::fs::write(&path, b"{ not json").unwrap();
    let out = run_cli(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status, 2);
}

#[test]
fn empty_selection_yields_vacuous_report() {
    let base = tmp("empty-selection");
    let config_path = write_config(
        &base,
        &serde_json::json!({
            "selection": { "ids": [] },
            "scratch_root": scratch("empty-selection"),
            "sentinel_roots": []
        }),
    );
    let out = run_cli(&["run", "--config", config_path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let report = parse_structured(out.stdout.as_bytes()).unwrap();
    assert!(report.results.is_empty());
    assert!(report.summary.is_empty());
}
