//! End-to-end tests of the `nsbox` binary: exit codes, output formats, and
//! determinism.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn nsbox() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nsbox"))
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = nsbox()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

const PR_JSON: &str = r#"{"table": [
    [0.5, 0.0, 0.0, 0.5],
    [0.5, 0.0, 0.0, 0.5],
    [0.5, 0.0, 0.0, 0.5],
    [0.0, 0.5, 0.5, 0.0]
]}"#;

const SIGNALING_JSON: &str = r#"{"table": [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0]
]}"#;

#[test]
fn measure_reports_full_nonlocality() {
    let out = run_with_stdin(&["box", "measure"], PR_JSON);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["G"]["value"].as_f64().unwrap(), 4.0);
    assert_eq!(v["chsh"]["max"].as_f64().unwrap(), 4.0);
    assert_eq!(v["chsh"]["violated"], serde_json::Value::Bool(true));
    assert_eq!(v["Q"]["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn signaling_input_exits_with_validation_code() {
    let out = run_with_stdin(&["box", "measure"], SIGNALING_JSON);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error[Signaling]"), "stderr: {err}");
    assert!(err.contains("marginal"), "stderr: {err}");
}

#[test]
fn relaxed_tolerance_flag_and_env_are_honored() {
    // Slightly denormalized row: rejected at the default tolerance,
    // accepted when the tolerance is widened either way.
    let near = r#"{"table": [
        [0.2501, 0.25, 0.25, 0.25],
        [0.25, 0.25, 0.25, 0.25],
        [0.25, 0.25, 0.25, 0.25],
        [0.25, 0.25, 0.25, 0.25]
    ]}"#;
    let strict = run_with_stdin(&["box", "measure"], near);
    assert_eq!(strict.status.code(), Some(1));

    let relaxed = run_with_stdin(&["box", "measure", "--tol", "1e-2"], near);
    assert_eq!(relaxed.status.code(), Some(0));

    let mut child = nsbox()
        .args(["box", "measure"])
        .env("NSBOX_TOL", "1e-2")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.as_mut().unwrap().write_all(near.as_bytes()).unwrap();
    let via_env = child.wait_with_output().unwrap();
    assert_eq!(via_env.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_three() {
    let out = nsbox().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = nsbox().args(["box", "decompose"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "missing required --mode");
}

#[test]
fn catalog_list_enumerates_all_families() {
    let out = nsbox().args(["catalog", "list"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = v.as_array().unwrap();
    // 8 + 16 + 8 + 32 + 8 + 8 + 1
    assert_eq!(entries.len(), 81);
    assert!(entries.iter().any(|e| e["family"] == "mermin-nmm"));
    assert!(entries.iter().all(|e| e["box"]["table"].is_array()));
}

#[test]
fn quantum_gen_reports_measures() {
    let out = nsbox()
        .args([
            "quantum", "gen", "--state", "werner", "--params", "0.5", "--settings", "mermin",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let q = v["measures"]["Q"]["value"].as_f64().unwrap();
    assert!((q - 1.0).abs() < 1e-12);
    assert_eq!(
        v["measures"]["steering"]["anticommuting_observables"],
        serde_json::Value::Bool(true)
    );
}

#[test]
fn decompose_canonical3_via_stdin() {
    let out = run_with_stdin(&["box", "decompose", "--mode", "canonical3"], PR_JSON);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["mu"].as_f64().unwrap(), 1.0);
    assert_eq!(v["pr_index"], serde_json::Value::String("000".into()));
}

#[test]
fn membership_region_parsing() {
    let out = run_with_stdin(&["box", "membership", "--region", "N_Tmm"], PR_JSON);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["member"], serde_json::Value::Bool(false));

    let out = run_with_stdin(&["box", "membership", "--region", "atlantis"], PR_JSON);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_output_is_deterministic_and_parseable() {
    let args = [
        "sweep",
        "--family",
        "isotropic-pr",
        "--start",
        "0",
        "--stop",
        "1",
        "--steps",
        "11",
        "--quantities",
        "chsh,G",
    ];
    let a = nsbox().args(args).output().unwrap();
    let b = nsbox().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical runs emit identical bytes");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# family=isotropic-pr"));
    let (cols, rows) = nsbox_cli::sweep::parse_csv(&text).unwrap();
    assert_eq!(cols, ["p", "chsh", "G"]);
    assert_eq!(rows.len(), 11);
    assert!((rows[5][1] - 2.0).abs() < 1e-12);
}

#[test]
fn check_campaign_exit_codes() {
    let ok = nsbox()
        .args(["check", "--property", "gq-monogamy", "--n", "300", "--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["run"].as_u64().unwrap(), 300);
    assert_eq!(v["failed"].as_u64().unwrap(), 0);

    // The unrestricted-settings nullity probe reports its failures through
    // the campaign exit code.
    let failing = nsbox()
        .args(["check", "--property", "cqqc-null", "--n", "50", "--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(failing.status.code(), Some(2));
}
