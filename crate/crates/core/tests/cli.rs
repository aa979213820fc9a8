mod common;

use std::process::Command;

use common::quick;
use kerr_interface::harness::ExperimentKind;

fn kerr_run(config: &str, out: &std::path::Path) -> std::process::Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_kerr-run"))
        .arg(&path)
        .arg("--out")
        .arg(out)
        .env("KERR_THREADS", "2")
        .output()
        .unwrap()
}

#[test]
fn bad_tolerance_exits_2_without_output() {
    let out = tempfile::tempdir().unwrap().path().join("o");
    let r = kerr_run("experiment = \"audit\"\ntol = 0.0\n", &out);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("tol"));
    assert!(!out.exists());
}

#[test]
fn missing_file_and_unknown_kind_exit_2() {
    let r = Command::new(env!("CARGO_BIN_EXE_kerr-run")).arg("/nonexistent/run.toml").output().unwrap();
    assert_eq!(r.status.code(), Some(2));
    let out = tempfile::tempdir().unwrap();
    assert_eq!(kerr_run("experiment = \"figure-4\"\n", out.path()).status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, quick(ExperimentKind::ResidualTrace).to_toml()).unwrap();
    let r = Command::new(env!("CARGO_BIN_EXE_kerr-run"))
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("o"))
        .env("KERR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn no_mode_exits_3() {
    let mut c = quick(ExperimentKind::Dispersion);
    c.profile.builtin = None;
    c.profile.eps1_minus = Some("1".into());
    c.profile.eps1_plus = Some("2".into());
    c.profile.eps3_minus = Some("1".into());
    c.profile.eps3_plus = Some("1".into());
    let out = tempfile::tempdir().unwrap();
    let r = kerr_run(&c.to_toml(), out.path());
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("no localized mode"));
}

#[test]
fn nonconverged_sweep_exits_4_and_keeps_data() {
    let mut c = quick(ExperimentKind::EpsSweep);
    c.eps = vec![1e-3, 5e-4, 3e-4, 1e-4];
    c.max_iter = 1;
    c.tol = 1e-14;
    let out = tempfile::tempdir().unwrap();
    let r = kerr_run(&c.to_toml(), out.path());
    assert_eq!(r.status.code(), Some(4), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.path().join("eps_sweep.csv").exists());
    assert!(out.path().join("record.json").exists());
}

#[test]
fn audit_failure_exits_5() {
    let mut c = quick(ExperimentKind::Audit);
    c.eps = vec![3e-4];
    c.ratio_bound = 1e-12;
    let out = tempfile::tempdir().unwrap();
    let r = kerr_run(&c.to_toml(), out.path());
    assert_eq!(r.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&r.stderr).contains("estimate ratio"));
}

#[test]
fn residual_trace_succeeds() {
    let out = tempfile::tempdir().unwrap();
    let r = kerr_run(&quick(ExperimentKind::ResidualTrace).to_toml(), out.path());
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stdout).contains("converged = true"));
}
