//! Without the Kerr term one Picard step is the exact discrete solution; compare
//! it with a direct solve on a continuous P1 space.
//!
//! cargo run --release --example linear_limit

use std::sync::Arc;

use kerr_interface::prelude::*;

fn main() {
    let linear = DielectricProfile::fig1().without_kerr();
    let grid = Grid1D::new(-20.0, 20.0, 5e-3).unwrap();
    let mode = Arc::new(fundamental_mode(&linear, 3.0, &grid).unwrap().unwrap());
    let ansatz = AnsatzField::new(mode, linear.clone(), Envelope::gaussian(5e6), 1e-3).unwrap();

    let config = SolverConfig { h: 0.1, eps: 1e-3, ..Default::default() };
    let problem = TransmissionProblem::new(&config, &linear).unwrap();
    let t = problem.bind(&ansatz);
    let first = t.step(&t.initial_state(), &config).unwrap();
    let second = t.step(&first, &config).unwrap();
    let direct = t.solve_linear_continuous().unwrap();
    println!("|grad phi|_2 = {:.6e}", first.phi.grad_l2_norm());
    println!("relative gradient difference to direct solve: {:.2e}", first.phi.grad_l2_distance(&direct) / direct.grad_l2_norm());
    println!("second step changes it by {:.2e}", second.phi.grad_l2_distance(&first.phi));
    println!("tangential jump {:.1e}", t.jump_tangential(&first.phi));
}
