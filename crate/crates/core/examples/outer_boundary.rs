//! The two outer boundary treatments side by side.
//!
//! With `TotalFlux` the whole flux `D(φ)` has zero normal component on the outer
//! boundary; with `GradientNeumann` only `∂ₙφ` vanishes, so the ansatz flux
//! through the box walls enters the load. They agree when the packet is well
//! inside the box and part ways when it is not.
//!
//! cargo run --release --example outer_boundary

use std::sync::Arc;

use kerr_interface::prelude::*;

fn main() {
    let profile = DielectricProfile::fig1();
    let grid = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();
    let mode = Arc::new(fundamental_mode(&profile, 3.0, &grid).unwrap().unwrap());

    let problems: Vec<(OuterBoundary, SolverConfig, TransmissionProblem)> = [OuterBoundary::TotalFlux, OuterBoundary::GradientNeumann]
        .into_iter()
        .map(|outer| {
            let cfg = SolverConfig { outer_boundary: outer, h: 0.1, ..Default::default() };
            let p = TransmissionProblem::new(&cfg, &profile).unwrap();
            (outer, cfg, p)
        })
        .collect();
    println!("{:>7} {:>14} {:>14}", "eps", "total-flux", "gradient");
    for eps in [1e-3, 3e-4, 1e-4] {
        let ansatz = AnsatzField::new(mode.clone(), profile.clone(), Envelope::gaussian(5e6), eps).unwrap();
        let g: Vec<f64> = problems
            .iter()
            .map(|(_, cfg, p)| p.bind(&ansatz).solve(&SolverConfig { eps, ..cfg.clone() }).unwrap().phi.grad_l2_norm())
            .collect();
        println!("{eps:7.0e} {:14.5e} {:14.5e}", g[0], g[1]);
    }
}
