//! One Kerr transmission solve at the reference point, with its diagnostics.
//!
//! cargo run --release --example transmission_solve

use std::sync::Arc;

use kerr_interface::prelude::*;

fn main() {
    let profile = DielectricProfile::fig1();
    let grid = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();
    let mode = Arc::new(fundamental_mode(&profile, 3.0, &grid).unwrap().unwrap());
    let ansatz = AnsatzField::new(mode, profile.clone(), Envelope::gaussian(5e6), 3e-4).unwrap();

    let config = SolverConfig { eps: 3e-4, h: 0.05, tol: 1e-12, ..Default::default() };
    let problem = TransmissionProblem::new(&config, &profile).unwrap();
    println!("{problem:?}");
    let t = problem.bind(&ansatz);
    let state = t
        .solve_observed(&config, |r| println!("iteration {}: residual {:.3e} ({:.2} s)", r.n, r.residual, r.wall_time))
        .unwrap();
    println!("converged: {}, relative residual {:.2e}", state.converged, state.relative_residual());

    let summary = t.final_record(&state);
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    let audit = t.audit(&state).unwrap();
    println!("estimate ratio {:.3e}, tangential jump {:.1e}", audit.ratio, audit.jump_tangential);
    let zero = FemField::zeros(problem.mesh().clone());
    println!("div D surrogate: {:.3e} at phi = 0, {:.3e} at the solution", t.div_d_norm(&zero), summary.div_d_norm);
}
