//! Size of the corrector against eps on one factored system.
//!
//! cargo run --release --example eps_sweep

use std::sync::Arc;

use kerr_interface::prelude::*;
use kerr_interface::quadrature::loglog_slope;

fn main() {
    let profile = DielectricProfile::fig1();
    let grid = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();
    let mode = Arc::new(fundamental_mode(&profile, 3.0, &grid).unwrap().unwrap());
    let base = AnsatzField::new(mode, profile.clone(), Envelope::gaussian(5e6), 1e-3).unwrap();

    // the system matrix does not depend on eps, so one factorization serves all points
    let config = SolverConfig::default();
    let problem = TransmissionProblem::new(&config, &profile).unwrap();
    let eps = [1e-3, 7e-4, 5e-4, 3e-4, 2e-4, 1e-4];
    let mut norms = Vec::new();
    for &e in &eps {
        let ansatz = base.with_eps(e).unwrap();
        let state = problem.bind(&ansatz).solve(&SolverConfig { eps: e, ..config.clone() }).unwrap();
        let g = state.phi.grad_l2_norm();
        println!("eps {e:7.0e}: |grad phi|_2 = {g:.4e} ({} iterations)", state.n);
        norms.push(g);
    }
    println!("fitted slope {:.3}", loglog_slope(&eps, &norms).unwrap());
}
