//! Pure Neumann Poisson problem with a known solution: observed convergence orders.
//!
//! cargo run --release --example manufactured_poisson

use std::f64::consts::PI;

use kerr_interface::fem::{
    assemble_scalar_load, assemble_stiffness, h1_seminorm_error, l2_error, solve_constrained, Constraint, Rect, SideMesh,
    SparseSystem,
};
use kerr_interface::profile::Side;

fn main() {
    let u = |x: [f64; 2]| (PI * x[0]).cos() * (PI * x[1]).cos();
    let grad = |x: [f64; 2]| [-PI * (PI * x[0]).sin() * (PI * x[1]).cos(), -PI * (PI * x[0]).cos() * (PI * x[1]).sin()];
    let mut last: Option<(f64, f64)> = None;
    println!("{:>8} {:>12} {:>6} {:>12} {:>6}", "h", "L2 error", "order", "H1 error", "order");
    for h in [1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let mesh = SideMesh::new(Side::Plus, Rect::new((0.0, 1.0), (0.0, 1.0)), h).unwrap();
        let k = assemble_stiffness(&mesh, |_| 1.0);
        let f = assemble_scalar_load(&mesh, |x| 2.0 * PI * PI * u(x));
        // solution fixed up to a constant: ask for zero mean
        let mean = Constraint { coeffs: mesh.node_integrals().into_iter().enumerate().collect(), value: 0.0 };
        let uh = solve_constrained(&SparseSystem::new(k, f).with_constraint(mean)).unwrap();
        let (e0, e1) = (l2_error(&mesh, &uh, u), h1_seminorm_error(&mesh, &uh, grad));
        let (p0, p1) = last.map_or((f64::NAN, f64::NAN), |(a, b)| ((a / e0).log2(), (b / e1).log2()));
        println!("{h:8.5} {e0:12.4e} {p0:6.2} {e1:12.4e} {p1:6.2}");
        last = Some((e0, e1));
    }
}
