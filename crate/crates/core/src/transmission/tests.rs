use std::sync::{Arc, OnceLock};

use super::*;
use crate::ansatz::Envelope;
use crate::fem::FemField;
use crate::grid::Grid1D;
use crate::mode::{fundamental_mode, InterfaceMode};
use crate::profile::Side;

fn mode() -> Arc<InterfaceMode> {
    static MODE: OnceLock<Arc<InterfaceMode>> = OnceLock::new();
    MODE.get_or_init(|| {
        let g = Grid1D::new(-20.0, 20.0, 0.01).unwrap();
        Arc::new(fundamental_mode(&DielectricProfile::fig1(), 3.0, &g).unwrap().unwrap())
    })
    .clone()
}

fn ansatz(profile: &DielectricProfile, envelope: Envelope, eps: f64) -> AnsatzField {
    AnsatzField::new(mode(), profile.clone(), envelope, eps).unwrap()
}

fn small(h: f64) -> SolverConfig {
    SolverConfig {
        h,
        minus: Rect::new((-3.0, 0.0), (-3.0, 3.0)),
        plus: Rect::new((0.0, 3.0), (-3.0, 3.0)),
        ..Default::default()
    }
}

#[test]
fn config_validation() {
    let ok = SolverConfig::default();
    assert!(ok.validate().is_ok());
    for bad in [
        SolverConfig { tol: 0.0, ..ok.clone() },
        SolverConfig { max_iter: 0, ..ok.clone() },
        SolverConfig { p: 5, ..ok.clone() },
        SolverConfig { relaxation: 1.5, ..ok.clone() },
        SolverConfig { eps: 0.0, ..ok.clone() },
    ] {
        assert!(matches!(bad.validate(), Err(SolverError::Config(_))), "{bad:?}");
    }
}

#[test]
fn zero_data_gives_zero_everything() {
    let p = DielectricProfile::fig1();
    let cfg = small(0.5);
    let problem = TransmissionProblem::new(&cfg, &p).unwrap();
    let a = ansatz(&p, Envelope::zero(), 3e-4);
    let t = problem.bind(&a);
    let s = t.solve(&cfg).unwrap();
    assert_eq!(s.n, 1);
    assert!(s.converged);
    assert!(s.phi.is_zero());
    assert!(s.g.iter().all(|&v| v == 0.0));
    assert_eq!(s.residuals, vec![0.0]);
    assert_eq!(t.div_d_norm(&s.phi), 0.0);
    let r = t.audit(&s).unwrap();
    assert_eq!((r.lhs_22, r.energy_j_phi, r.energy_j_0, r.jump_tangential, r.jump_flux), (0.0, 0.0, 0.0, 0.0, 0.0));
    assert_eq!(r.rhs_terms.total(), 0.0);
    assert!(r.ratio.is_nan());
}

#[test]
fn linear_problem_converges_in_one_step_and_matches_oracle() {
    let p = DielectricProfile::fig1().without_kerr();
    let cfg = SolverConfig { max_iter: 3, ..small(0.25) };
    let problem = TransmissionProblem::new(&cfg, &p).unwrap();
    let a = ansatz(&p, Envelope::gaussian(5e6), 1e-3);
    let t = problem.bind(&a);
    let s1 = t.step(&t.initial_state(), &cfg).unwrap();
    let s2 = t.step(&s1, &cfg).unwrap();
    for side in [Side::Minus, Side::Plus] {
        assert_eq!(s1.phi.values(side), s2.phi.values(side));
    }
    assert!(s1.residuals[0] <= 1e-10 * s1.initial_residual, "{:?}", s1.residuals);

    let oracle = t.solve_linear_continuous().unwrap();
    let mut diff = 0.0;
    for side in [Side::Minus, Side::Plus] {
        let m = problem.mesh().side(side);
        for tri in 0..m.n_triangles() {
            let (a, b) = (s1.phi.gradient(side, tri), oracle.gradient(side, tri));
            diff += m.areas[tri] * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2));
        }
    }
    let rel = diff.sqrt() / oracle.grad_l2_norm();
    assert!(rel <= 1e-10, "relative gradient difference {rel}");
}

#[test]
fn kerr_solve_properties() {
    let p = DielectricProfile::fig1();
    let cfg = small(0.25);
    let problem = TransmissionProblem::new(&cfg, &p).unwrap();
    let a = ansatz(&p, Envelope::gaussian(5e6), 3e-4);
    let t = problem.bind(&a);
    let s = t.solve(&cfg).unwrap();
    assert!(s.converged, "{:?}", s.residuals);
    assert!(s.n <= 20);
    assert_eq!(s.residuals.len(), s.n);
    assert!(s.residuals[0] < s.initial_residual);
    assert!(s.relative_residual() <= cfg.tol);
    let r = t.audit(&s).unwrap();
    assert!(r.jump_tangential <= 1e-10, "{r:?}");
    assert!(r.energy_j_phi < r.energy_j_0, "{r:?}");
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
    let zero = FemField::zeros(problem.mesh().clone());
    assert!(t.div_d_norm(&s.phi) * 10.0 <= t.div_d_norm(&zero));
}

#[test]
fn residual_of_zero_field_is_the_load_norm() {
    let p = DielectricProfile::fig1();
    let cfg = small(0.5);
    let problem = TransmissionProblem::new(&cfg, &p).unwrap();
    let a = ansatz(&p, Envelope::gaussian(5e6), 1e-3);
    let t = problem.bind(&a);
    let zero = FemField::zeros(problem.mesh().clone());
    let load = t.load(&zero, true);
    let mass: Vec<f64> = problem.node_mass.plus.iter().chain(&problem.node_mass.minus).copied().collect();
    let expect = load.iter().zip(&mass).map(|(l, m)| l * l / m).sum::<f64>().sqrt();
    let got = t.residual_norm(&zero, &vec![0.0; problem.mesh().n_interface()]);
    assert!((got - expect).abs() <= 1e-12 * expect, "{got} vs {expect}");
}

#[test]
fn energy_gradient_matches_weak_form() {
    // large amplitude so that the quartic term matters
    let p = DielectricProfile::fig1();
    let cfg = small(0.5);
    let problem = TransmissionProblem::new(&cfg, &p).unwrap();
    let a = ansatz(&p, Envelope::constant(20.0), 0.01);
    let t = problem.bind(&a);
    let phi = FemField::interpolate(problem.mesh().clone(), |s, x| {
        0.3 * (x[0] + 0.5 * x[1]).sin() + if s == Side::Minus { 0.1 } else { 0.0 }
    })
    .unwrap();
    let grad = t.weak_gradient(&phi);
    let scale = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let np = problem.mesh().plus.n_nodes();
    let delta = 1e-5;
    for j in (0..grad.len()).step_by(7) {
        let bump = |d: f64| {
            let (side, k) = if j < np { (Side::Plus, j) } else { (Side::Minus, j - np) };
            let mut minus = phi.values(Side::Minus).to_vec();
            let mut plus = phi.values(Side::Plus).to_vec();
            match side {
                Side::Plus => plus[k] += d,
                Side::Minus => minus[k] += d,
            }
            t.energy(&FemField::new(problem.mesh().clone(), minus, plus).unwrap())
        };
        let fd = (bump(delta) - bump(-delta)) / (2.0 * delta);
        assert!((fd - grad[j]).abs() <= 1e-6 * scale, "node {j}: {fd} vs {}", grad[j]);
    }
}

#[test]
fn gradient_neumann_variant_converges() {
    let p = DielectricProfile::fig1();
    let cfg = SolverConfig { outer_boundary: OuterBoundary::GradientNeumann, ..small(0.25) };
    let problem = TransmissionProblem::new(&cfg, &p).unwrap();
    let a = ansatz(&p, Envelope::gaussian(5e6), 3e-4);
    let t = problem.bind(&a);
    let s = t.solve(&cfg).unwrap();
    assert!(s.converged, "{:?}", s.residuals);
    assert!(t.jump_tangential(&s.phi) <= 1e-10);
}

#[test]
fn relaxation_still_converges() {
    let p = DielectricProfile::fig1();
    let cfg = SolverConfig { relaxation: 0.5, ..small(0.5) };
    let problem = TransmissionProblem::new(&cfg, &p).unwrap();
    let a = ansatz(&p, Envelope::gaussian(5e6), 3e-4);
    let s = problem.bind(&a).solve(&cfg).unwrap();
    assert!(s.converged);
    assert!(s.n > 5, "damped iteration should need more steps, took {}", s.n);
}

#[test]
fn observer_sees_every_iteration() {
    let p = DielectricProfile::fig1();
    let cfg = SolverConfig { max_iter: 2, tol: 1e-30, ..small(0.5) };
    let problem = TransmissionProblem::new(&cfg, &p).unwrap();
    let a = ansatz(&p, Envelope::gaussian(5e6), 3e-4);
    let mut seen = Vec::new();
    let s = problem.bind(&a).solve_observed(&cfg, |r| seen.push(*r)).unwrap();
    assert!(!s.converged);
    assert_eq!(s.n, 2);
    assert_eq!(seen.iter().map(|r| r.n).collect::<Vec<_>>(), vec![1, 2]);
    assert_eq!(seen[1].residual, s.residuals[1]);
}
