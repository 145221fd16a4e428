//! End-to-end checks of the command-line contract: exit codes, artifact
//! files, and bit-identical reruns.

use std::path::PathBuf;
use std::process::Command;

fn sweno() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sweno"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sweno-cli-{tag}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    dir
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let dir = temp_dir("run");
    let out = sweno()
        .args([
            "run",
            "double_rarefaction",
            "--nx",
            "120",
            "--tfinal",
            "0.05",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("min pressure"));
    assert!(stdout.contains("pressure sweeps"));

    let field = std::fs::read_to_string(dir.join("field.csv")).unwrap();
    assert!(field.starts_with("x,rho,u,p,E"));
    assert_eq!(field.lines().count(), 121);
    assert!(dir.join("summary.json").exists());
    assert!(dir.join("sweeps.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unlimited_double_rarefaction_fails_with_diagnostic() {
    let out = sweno()
        .args(["run", "double_rarefaction", "--no-limiter"])
        .output()
        .unwrap();
    assert!(!out.status.success(), "run must fail without the limiter");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

#[test]
fn unknown_problem_fails() {
    let out = sweno().args(["run", "sod"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn convergence_requires_exact_solution() {
    let out = sweno()
        .args(["convergence", "sedov_1d", "--resolutions", "100,200"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn convergence_prints_error_table() {
    let dir = temp_dir("conv");
    let out = sweno()
        .args(["convergence", "vortex", "--resolutions", "45,90", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("L1 error"));
    assert!(stdout.lines().count() >= 3);

    let csv = std::fs::read_to_string(dir.join("convergence.csv")).unwrap();
    assert!(csv.starts_with("resolution,"));
    assert_eq!(csv.lines().count(), 3);
    // First row has no order; second must.
    let second = csv.lines().nth(2).unwrap();
    assert!(!second.contains("NaN"), "order missing in `{second}`");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reruns_are_bit_identical() {
    let (a, b) = (temp_dir("rerun-a"), temp_dir("rerun-b"));
    for dir in [&a, &b] {
        let out = sweno()
            .args(["run", "sedov_1d", "--nx", "200", "--tfinal", "0.0002", "--out"])
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let field_a = std::fs::read(a.join("field.csv")).unwrap();
    let field_b = std::fs::read(b.join("field.csv")).unwrap();
    assert_eq!(field_a, field_b);
    let sweeps_a = std::fs::read(a.join("sweeps.csv")).unwrap();
    let sweeps_b = std::fs::read(b.join("sweeps.csv")).unwrap();
    assert_eq!(sweeps_a, sweeps_b);
    std::fs::remove_dir_all(&a).ok();
    std::fs::remove_dir_all(&b).ok();
}
