mod common;

use common::{quick, read_csv};
use kerr_interface::harness::{run, EnvelopeSpec, ExperimentKind, ProfileSpec, RunConfig};

fn json(path: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn residual_trace_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let c = quick(ExperimentKind::ResidualTrace);
    let rec = run(&c, dir.path()).unwrap();
    assert!(rec.flags["converged"]);

    let (header, rows) = read_csv(&dir.path().join("residual_trace.csv"));
    assert_eq!(header, ["n", "residual", "relative_residual"]);
    assert!(!rows.is_empty() && rows.len() <= c.max_iter);
    assert_eq!(rows[0][0], "1");

    let log = std::fs::read_dir(dir.path().join("logs")).unwrap().next().unwrap().unwrap().path();
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(&log).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), rows.len() + 1);
    for key in ["n", "residual", "wall_time"] {
        assert!(lines[0].get(key).is_some(), "{key}");
    }
    for key in ["norm_grad_phi_L2", "div_D_norm", "energy_J_phi", "energy_J_0", "jump_flux"] {
        assert!(lines.last().unwrap().get(key).is_some(), "{key}");
    }

    // the echo reproduces the run bit for bit
    let echo = RunConfig::load(&dir.path().join("inputs.toml")).unwrap();
    assert_eq!(echo, c);
    let again = tempfile::tempdir().unwrap();
    run(&echo, again.path()).unwrap();
    let a = std::fs::read(dir.path().join("residual_trace.csv")).unwrap();
    let b = std::fs::read(again.path().join("residual_trace.csv")).unwrap();
    assert_eq!(a, b);
    assert!(dir.path().join("residual_trace.svg").exists());
    assert_eq!(json(&dir.path().join("record.json"))["experiment"], "residual-trace");
}

#[test]
fn zero_data_trace_is_one_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(ExperimentKind::ResidualTrace);
    c.envelope = EnvelopeSpec::Zero;
    run(&c, dir.path()).unwrap();
    let (_, rows) = read_csv(&dir.path().join("residual_trace.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn single_eps_sweep_has_no_slope() {
    let dir = tempfile::tempdir().unwrap();
    let c = quick(ExperimentKind::EpsSweep);
    let rec = run(&c, dir.path()).unwrap();
    assert!(rec.slopes.is_none());
    let (header, rows) = read_csv(&dir.path().join("eps_sweep.csv"));
    assert_eq!(&header[..2], ["eps", "norm_grad_phi_L2"]);
    assert_eq!(rows.len(), 1);
    assert!(json(&dir.path().join("record.json")).get("slopes").is_none());
}

#[test]
fn rescaled_eps_sweep_keeps_its_slope_within_fit_noise() {
    // full-size box so that no packet is cut off
    let fit = |eps: Vec<f64>| {
        let dir = tempfile::tempdir().unwrap();
        let mut c = quick(ExperimentKind::EpsSweep);
        c.domain = Default::default();
        c.h = vec![0.1];
        c.eps = eps;
        let rec = run(&c, dir.path()).unwrap();
        let (_, rows) = read_csv(&dir.path().join("eps_sweep.csv"));
        assert_eq!(rows.len(), c.eps.len() + 1);
        assert_eq!(rows.last().unwrap()[0], "slope");
        (rec.slopes.unwrap()["norm_grad_phi_L2"], rec.scalars["slope_std_error"])
    };
    let base = vec![1e-3, 7e-4, 5e-4, 3e-4, 2e-4, 1e-4];
    let (s1, e1) = fit(base.clone());
    let (s2, e2) = fit(base.iter().map(|e| 2.0 * e).collect());
    assert!((s1 - s2).abs() <= e1.hypot(e2), "{s1} +- {e1} vs {s2} +- {e2}");
}

#[test]
fn h_sweep_is_deterministic_and_flags_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(ExperimentKind::HSweep);
    c.h = vec![0.5, 0.25, 0.25];
    let rec = run(&c, dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("h_sweep.csv"));
    assert_eq!(&header[..2], ["h", "div_D_norm"]);
    assert_eq!(rows[1], rows[2], "repeated h gives identical output");
    // equal values are not a strict decrease
    assert!(!rec.flags["strictly_decreasing"]);

    c.h = vec![0.5, 0.25, 0.125];
    let rec = run(&c, tempfile::tempdir().unwrap().path()).unwrap();
    assert!(rec.flags["strictly_decreasing"]);
    assert!(rec.slopes.is_none(), "three points are too few to fit");
}

#[test]
fn linear_profile_audit_passes_linear_limit() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(ExperimentKind::Audit);
    c.profile = ProfileSpec {
        builtin: None,
        eps1_minus: Some("1".into()),
        eps1_plus: Some("1 + exp(-x)".into()),
        eps3_minus: Some("0".into()),
        eps3_plus: Some("0".into()),
    };
    // the audit as a whole may fail on this tiny domain; only the linear check matters here
    let _ = run(&c, dir.path());
    let audit = json(&dir.path().join("audit.json"));
    let checks = audit["checks"].as_array().unwrap();
    let lin = checks.iter().find(|c| c["name"] == "linear limit one step").unwrap();
    assert_eq!(lin["passed"], true, "{lin}");
    let (header, _) = read_csv(&dir.path().join("norms.csv"));
    assert_eq!(header, ["eps", "U0_L2", "U0_L4", "b_L2", "b_L1log"]);
}

#[test]
fn no_mode_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(ExperimentKind::Dispersion);
    c.profile = ProfileSpec { builtin: None, ..ProfileSpec::default() };
    c.profile.eps1_minus = Some("1".into());
    c.profile.eps1_plus = Some("2".into());
    c.profile.eps3_minus = Some("1".into());
    c.profile.eps3_plus = Some("1".into());
    let err = run(&c, dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn dispersion_rows_match_grid() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = quick(ExperimentKind::Dispersion);
    c.omegas = vec![2.5];
    let rec = run(&c, dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("mode.csv"));
    assert_eq!(header, ["x1", "eps1_w1", "w2_imag", "w3"]);
    assert_eq!(rows.len(), c.mode_grid().unwrap().n_points);
    let (header, rows) = read_csv(&dir.path().join("dispersion.csv"));
    assert_eq!(header, ["omega", "k0", "boundary_ratio", "residual_L"]);
    assert_eq!(rows.len(), 2);
    assert!((rec.scalars["k0"] - 3.4385).abs() < 0.01);
    for f in ["mode.svg", "mode_decay.svg", "dispersion.svg"] {
        assert!(std::fs::read_to_string(dir.path().join(f)).unwrap().contains("<polyline"));
    }
}
