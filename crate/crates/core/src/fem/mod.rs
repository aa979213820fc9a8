//! Structured P1 finite elements on two rectangles that meet at `x1 = 0`.
//!
//! Each side has its own nodes; the interface nodes are duplicated so that a
//! field may jump across `x1 = 0`.
//!
//! ```
//! use kerr_interface::fem::{build_mesh, Rect};
//!
//! let mesh = build_mesh(Rect::new((-6.0, 0.0), (-6.0, 6.0)), Rect::new((0.0, 6.0), (-6.0, 6.0)), 0.25).unwrap();
//! assert_eq!(mesh.plus.n_nodes(), 1225);
//! assert_eq!(mesh.plus.n_triangles(), 2304);
//! ```

mod assembly;
mod field;
mod mesh;
mod system;

pub use assembly::{
    assemble_boundary_load, assemble_flux_load, assemble_interface_mass, assemble_scalar_load, assemble_stiffness,
    element_stiffness, EDGE_MIDPOINTS,
};
pub use field::{h1_seminorm_error, l2_error, FemField};
pub use mesh::{build_mesh, triangle_geometry, BoundaryEdge, Rect, SideMesh, TransmissionMesh};
pub use system::{solve_constrained, Constraint, SparseSystem};

use crate::sparse::LinearSolveError;

#[derive(Debug, thiserror::Error)]
pub enum FemError {
    #[error("mesh configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("non-finite nodal value")]
    NonFinite,
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Side;
    use crate::quadrature::loglog_slope;
    use std::f64::consts::PI;

    /// `−Δu = 2π² u` with `u = cos(πx₁) cos(πx₂)`, whose normal derivative vanishes on the unit square.
    fn manufactured(h: f64) -> (f64, f64) {
        let m = SideMesh::new(Side::Plus, Rect::new((0.0, 1.0), (0.0, 1.0)), h).unwrap();
        let u = |x: [f64; 2]| (PI * x[0]).cos() * (PI * x[1]).cos();
        let k = assemble_stiffness(&m, |_| 1.0);
        let f = assemble_scalar_load(&m, |x| 2.0 * PI * PI * u(x));
        let c = Constraint { coeffs: m.node_integrals().into_iter().enumerate().collect(), value: 0.0 };
        let uh = solve_constrained(&SparseSystem::new(k, f).with_constraint(c)).unwrap();
        let grad = |x: [f64; 2]| {
            [-PI * (PI * x[0]).sin() * (PI * x[1]).cos(), -PI * (PI * x[0]).cos() * (PI * x[1]).sin()]
        };
        (l2_error(&m, &uh, u), h1_seminorm_error(&m, &uh, grad))
    }

    #[test]
    fn manufactured_solution_orders() {
        let hs = [0.125, 0.0625, 0.03125];
        let (l2, h1): (Vec<f64>, Vec<f64>) = hs.iter().map(|&h| manufactured(h)).unzip();
        let p0 = loglog_slope(&hs, &l2).unwrap();
        let p1 = loglog_slope(&hs, &h1).unwrap();
        assert!(p0 >= 1.8, "L2 order {p0} from {l2:?}");
        assert!(p1 >= 0.9, "H1 order {p1} from {h1:?}");
    }
}
