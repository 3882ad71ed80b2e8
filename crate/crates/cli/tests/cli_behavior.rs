//! End-to-end behavior of the binary: exit codes, literal parsing, env
//! overrides, JSON output and its determinism.

use std::process::Command;

fn solenoidal() -> Command {
    Command::new(env!("CARGO_BIN_EXE_solenoidal"))
}

#[test]
fn compute_beta_inverse_case() {
    let out = solenoidal().arg("compute-beta").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("beta = (3, 2/5)"), "{text}");
    assert!(text.contains("mode = strict"), "{text}");
    assert!(text.contains("det = -1"), "{text}");
}

#[test]
fn compute_beta_identity_matrix() {
    let out = solenoidal()
        .args(["compute-beta", "--matrix", "1,0;0,1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("beta = (1/3, 5/2)"), "{text}");
}

#[test]
fn compute_beta_classifies_report_mode() {
    // c = 3 is not a unit; the alpha must avoid the singular line a = c t.
    let out = solenoidal()
        .args(["compute-beta", "--matrix", "1,1;3,4", "--alpha-t", "2/3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mode = report"), "{text}");
}

#[test]
fn singular_input_exits_2() {
    let out = solenoidal()
        .args(["compute-beta", "--matrix", "1,1;3,4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stderr).unwrap();
    assert!(text.contains("vanishes"), "{text}");
}

#[test]
fn parse_errors_exit_2() {
    let out = solenoidal()
        .args(["compute-beta", "--matrix", "1,1;1/3,4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = solenoidal()
        .args(["verify", "--suite", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = solenoidal()
        .args(["--p", "6", "compute-beta"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_only_gates_non_strict_matrices() {
    let out = solenoidal()
        .args([
            "verify",
            "--suite",
            "moebius",
            "--matrix",
            "1,1;3,4",
            "--alpha-t",
            "2/3",
            "--strict-only",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stderr).unwrap();
    assert!(text.contains("NotStrict"), "{text}");
}

#[test]
fn orbit_round_trip_and_incoherent_literal() {
    let out = solenoidal()
        .args(["orbit", "--point", "1/2,1/4,1/8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("q = (1/2, 0)"), "{text}");

    let out = solenoidal()
        .args(["orbit", "--point", "1/2,1/3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_writes_deterministic_json() {
    let dir = std::env::temp_dir();
    let p1 = dir.join("solenoidal_report_a.json");
    let p2 = dir.join("solenoidal_report_b.json");
    for p in [&p1, &p2] {
        let out = solenoidal()
            .args([
                "verify",
                "--suite",
                "moebius",
                "--samples",
                "50",
                "--out",
                p.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert_eq!(a, b, "reports differ between identical runs");

    let parsed: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert!(parsed["run_id"].is_string());
    assert!(parsed["config"]["p"].is_number());
    assert!(parsed["suites"].is_array());
    assert!(parsed["timing_ms"].is_null());
    let check = &parsed["suites"][0]["checks"][0];
    assert!(check["id"].is_string());
    assert!(check["status"].is_string());
    assert!(check["samples"].is_number());
}

#[test]
fn env_overrides_apply() {
    let out = solenoidal()
        .env("SOLENOIDAL_MATRIX", "1,0;0,1")
        .arg("compute-beta")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("beta = (1/3, 5/2)"), "{text}");
}

#[test]
fn digit_string_alpha_component() {
    // 1.01@-1 denotes 5/2, matching the default p-adic component.
    let out = solenoidal()
        .args(["compute-beta", "--alpha-r", "1.01@-1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("beta = (3, 2/5)"), "{text}");
}

#[test]
fn verify_groupoid_suite_exit_zero() {
    let out = solenoidal()
        .args(["verify", "--suite", "groupoid", "--samples", "60"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("RESULT: PASS"), "{text}");
    assert!(text.contains("groupoid_immersion"), "{text}");
}

#[test]
fn float_mode_runs() {
    let out = solenoidal()
        .args([
            "verify",
            "--suite",
            "groupoid",
            "--samples",
            "30",
            "--mode",
            "float",
            "--tolerance",
            "1e-9",
            "--alpha-t",
            "0.333333333",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
