use crate::quadrature::GL2_UNIT;
use crate::sparse::CsrMatrix;

use super::mesh::{SideMesh, TransmissionMesh};

/// Barycentric coordinates of the three edge midpoints, matching [`SideMesh::edge_midpoints`].
pub const EDGE_MIDPOINTS: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];

/// `a · ∫ ∇η_a · ∇η_b` on one triangle for a constant coefficient `a`.
pub fn element_stiffness(grads: &[[f64; 2]; 3], area: f64, coeff: f64) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = coeff * area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
        }
    }
    k
}

/// Stiffness matrix of one side with the coefficient frozen at each centroid.
pub fn assemble_stiffness(mesh: &SideMesh, coeff: impl Fn([f64; 2]) -> f64) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let ke = element_stiffness(&mesh.grads[t], mesh.areas[t], coeff(mesh.centroid(t)));
        for a in 0..3 {
            for b in 0..3 {
                trip.push((tri[a], tri[b], ke[a][b]));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.n_nodes(), mesh.n_nodes(), &trip)
}

/// Consistent P1 mass matrix on the interface segment, indexed by interface position.
pub fn assemble_interface_mass(mesh: &TransmissionMesh) -> CsrMatrix {
    let x2 = mesh.interface_x2();
    let m = x2.len();
    let mut trip = Vec::with_capacity(4 * m);
    for k in 0..m.saturating_sub(1) {
        let len = x2[k + 1] - x2[k];
        trip.push((k, k, len / 3.0));
        trip.push((k + 1, k + 1, len / 3.0));
        trip.push((k, k + 1, len / 6.0));
        trip.push((k + 1, k, len / 6.0));
    }
    CsrMatrix::from_triplets(m, m, &trip)
}

/// `−∫ F · ∇η_k` per node, with `F` sampled at the edge midpoints.
///
/// `flux(t, q)` receives the triangle and the midpoint index (see [`EDGE_MIDPOINTS`]),
/// so callers can use per-triangle state such as a piecewise constant gradient.
pub fn assemble_flux_load(mesh: &SideMesh, mut flux: impl FnMut(usize, usize) -> [f64; 2]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mut f = [0.0; 2];
        for q in 0..3 {
            let v = flux(t, q);
            f[0] += v[0];
            f[1] += v[1];
        }
        let w = -mesh.areas[t] / 3.0;
        let g = &mesh.grads[t];
        for a in 0..3 {
            out[tri[a]] += w * (f[0] * g[a][0] + f[1] * g[a][1]);
        }
    }
    out
}

/// `∫ f η_k` per node with the edge-midpoint rule.
pub fn assemble_scalar_load(mesh: &SideMesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mids = mesh.edge_midpoints(t);
        let w = mesh.areas[t] / 3.0;
        for (q, x) in mids.iter().enumerate() {
            let v = w * f(*x);
            for a in 0..3 {
                out[tri[a]] += v * EDGE_MIDPOINTS[q][a];
            }
        }
    }
    out
}

/// `∫_{∂Ω_out} g η_k` per node with two Gauss points per boundary edge.
///
/// `g(edge, x)` receives the edge index into `mesh.boundary` and the point.
pub fn assemble_boundary_load(mesh: &SideMesh, mut g: impl FnMut(usize, [f64; 2]) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes()];
    for (e, edge) in mesh.boundary.iter().enumerate() {
        let [p, q] = edge.nodes.map(|k| mesh.nodes[k]);
        for (s, w) in GL2_UNIT {
            let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
            let v = w * edge.length * g(e, x);
            out[edge.nodes[0]] += v * (1.0 - s);
            out[edge.nodes[1]] += v * s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::{build_mesh, Rect};
    use crate::profile::Side;

    fn unit_side(h: f64) -> SideMesh {
        SideMesh::new(Side::Plus, Rect::new((0.0, 1.0), (0.0, 1.0)), h).unwrap()
    }

    #[test]
    fn reference_element_stiffness() {
        let (g, area) = crate::fem::mesh::triangle_geometry([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let k = element_stiffness(&g, area, 1.0);
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((k[a][b] - expect[a][b]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stiffness_is_symmetric_with_zero_row_sums() {
        let s = unit_side(0.125);
        let k = assemble_stiffness(&s, |x| 1.0 + x[0] * x[1]);
        assert!(k.is_symmetric(1e-14));
        let ones = vec![1.0; s.n_nodes()];
        assert!(k.mul_vec(&ones).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn stiffness_is_independent_of_triangle_order() {
        let s = unit_side(0.25);
        let mut r = s.clone();
        let n = r.n_triangles();
        let perm: Vec<usize> = (0..n).map(|i| (7 * i + 3) % n).collect();
        r.triangles = perm.iter().map(|&t| s.triangles[t]).collect();
        r.grads = perm.iter().map(|&t| s.grads[t]).collect();
        r.areas = perm.iter().map(|&t| s.areas[t]).collect();
        let a = assemble_stiffness(&s, |x| 2.0 + x[0]).to_dense();
        let b = assemble_stiffness(&r, |x| 2.0 + x[0]).to_dense();
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn interface_mass_integrates_constants() {
        let m = build_mesh(Rect::new((-1.0, 0.0), (-1.0, 2.0)), Rect::new((0.0, 1.0), (-1.0, 2.0)), 0.25).unwrap();
        let mg = assemble_interface_mass(&m);
        let ones = vec![1.0; m.n_interface()];
        let total: f64 = mg.mul_vec(&ones).iter().sum();
        assert!((total - 3.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_load_is_exact_for_quadratics() {
        let s = unit_side(0.25);
        let load = assemble_scalar_load(&s, |x| x[0] * x[0]);
        assert!((load.iter().sum::<f64>() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn flux_load_of_constant_field() {
        // −∫ c · ∇η summed against x gives −∫ c₁
        let s = unit_side(0.25);
        let load = assemble_flux_load(&s, |_, _| [2.0, -1.0]);
        let sx: f64 = load.iter().zip(&s.nodes).map(|(l, p)| l * p[0]).sum();
        let sy: f64 = load.iter().zip(&s.nodes).map(|(l, p)| l * p[1]).sum();
        assert!((sx + 2.0).abs() < 1e-13 && (sy - 1.0).abs() < 1e-13);
        assert!(load.iter().sum::<f64>().abs() < 1e-13);
        // interior nodes see nothing
        let k = s.node_index(2, 2);
        assert!(load[k].abs() < 1e-15);
    }

    #[test]
    fn flux_load_of_gradient_of_x1_squared_on_one_triangle() {
        // triangle (0,0), (h,0), (0,h): ∂₁η = (-1/h, 1/h, 0) and ∫ 2x₁ = h³/3
        let h = 0.5;
        let s = SideMesh::new(Side::Plus, Rect::new((0.0, h), (0.0, h)), h).unwrap();
        let mids = [s.edge_midpoints(0), s.edge_midpoints(1)];
        let load = assemble_flux_load(&s, |t, q| [2.0 * mids[t][q][0], 0.0]);
        let mut only_a = SideMesh::new(Side::Plus, Rect::new((0.0, h), (0.0, h)), h).unwrap();
        only_a.triangles.truncate(1);
        only_a.grads.truncate(1);
        only_a.areas.truncate(1);
        let one = assemble_flux_load(&only_a, |_, q| [2.0 * mids[0][q][0], 0.0]);
        let int = h * h * h / 3.0;
        let expect = [int / h, -int / h, 0.0];
        for (a, &k) in s.triangles[0].iter().enumerate() {
            assert!((one[k] - expect[a]).abs() < 1e-15, "{a}: {} vs {}", one[k], expect[a]);
        }
        assert!(load.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn boundary_load_measures_outer_boundary() {
        let s = unit_side(0.25);
        let b = assemble_boundary_load(&s, |_, _| 1.0);
        assert!((b.iter().sum::<f64>() - 3.0).abs() < 1e-14);
    }
}
