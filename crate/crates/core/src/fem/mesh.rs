use serde::{Deserialize, Serialize};

use crate::profile::Side;

use super::FemError;

/// Axis-aligned rectangle `[x1.0, x1.1] × [x2.0, x2.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

impl Rect {
    pub fn new(x1: (f64, f64), x2: (f64, f64)) -> Self {
        Self { x1, x2 }
    }

    pub fn width(&self) -> f64 {
        self.x1.1 - self.x1.0
    }

    pub fn height(&self) -> f64 {
        self.x2.1 - self.x2.0
    }
}

/// Boundary edge on the outer boundary of one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub triangle: usize,
    pub normal: [f64; 2],
    pub length: f64,
}

/// Structured right-triangle mesh of one rectangle.
///
/// Node `(i, j)` sits at index `i * (ny + 1) + j`. Cell `(i, j)` holds triangles
/// `2c` = (p00, p10, p01) and `2c + 1` = (p11, p01, p10) with `c = i * ny + j`;
/// the right-angle vertex comes first.
#[derive(Debug, Clone)]
pub struct SideMesh {
    pub side: Side,
    pub rect: Rect,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Gradients of the three local hat functions, per triangle.
    pub grads: Vec<[[f64; 2]; 3]>,
    pub areas: Vec<f64>,
    /// Interface nodes sorted by `x2`.
    pub interface: Vec<usize>,
    pub boundary: Vec<BoundaryEdge>,
}

fn lerp(a: f64, b: f64, i: usize, n: usize) -> f64 {
    let t = i as f64 / n as f64;
    a * (1.0 - t) + b * t
}

fn cells(len: f64, h: f64) -> Option<usize> {
    let n = (len / h).round();
    (n >= 1.0 && (len / h - n).abs() <= 1e-8 * n).then_some(n as usize)
}

/// Hat-function gradients and area of a triangle.
pub fn triangle_geometry(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = p;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let area = 0.5 * det.abs();
    let g = [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ];
    (g, area)
}

impl SideMesh {
    pub fn new(side: Side, rect: Rect, h: f64) -> Result<Self, FemError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(FemError::Config(format!("mesh step must be positive, got {h}")));
        }
        let (Some(nx), Some(ny)) = (cells(rect.width(), h), cells(rect.height(), h)) else {
            return Err(FemError::Config(format!(
                "h = {h} does not divide the {:?} rectangle {} x {}",
                side,
                rect.width(),
                rect.height()
            )));
        };
        let idx = |i: usize, j: usize| i * (ny + 1) + j;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for i in 0..=nx {
            for j in 0..=ny {
                nodes.push([lerp(rect.x1.0, rect.x1.1, i, nx), lerp(rect.x2.0, rect.x2.1, j, ny)]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                let (p00, p10, p01, p11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                triangles.push([p00, p10, p01]);
                triangles.push([p11, p01, p10]);
            }
        }
        let (grads, areas): (Vec<_>, Vec<_>) = triangles
            .iter()
            .map(|t| triangle_geometry([nodes[t[0]], nodes[t[1]], nodes[t[2]]]))
            .unzip();
        let iface_i = match side {
            Side::Minus => nx,
            Side::Plus => 0,
        };
        let interface = (0..=ny).map(|j| idx(iface_i, j)).collect();

        let tri = |i: usize, j: usize, b: usize| 2 * (i * ny + j) + b;
        let mut boundary = Vec::new();
        for j in 0..ny {
            // the vertical edge away from the interface
            boundary.push(match side {
                Side::Minus => BoundaryEdge { nodes: [idx(0, j), idx(0, j + 1)], triangle: tri(0, j, 0), normal: [-1.0, 0.0], length: h },
                Side::Plus => BoundaryEdge { nodes: [idx(nx, j), idx(nx, j + 1)], triangle: tri(nx - 1, j, 1), normal: [1.0, 0.0], length: h },
            });
        }
        for i in 0..nx {
            boundary.push(BoundaryEdge { nodes: [idx(i, 0), idx(i + 1, 0)], triangle: tri(i, 0, 0), normal: [0.0, -1.0], length: h });
            boundary.push(BoundaryEdge { nodes: [idx(i, ny), idx(i + 1, ny)], triangle: tri(i, ny - 1, 1), normal: [0.0, 1.0], length: h });
        }
        Ok(Self { side, rect, h, nx, ny, nodes, triangles, grads, areas, interface, boundary })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    /// Triangle containing `x` (closed), if inside the rectangle.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let tol = 1e-12 * self.h;
        let r = &self.rect;
        if x[0] < r.x1.0 - tol || x[0] > r.x1.1 + tol || x[1] < r.x2.0 - tol || x[1] > r.x2.1 + tol {
            return None;
        }
        let s = (x[0] - r.x1.0) / self.h;
        let t = (x[1] - r.x2.0) / self.h;
        let i = (s.floor().max(0.0) as usize).min(self.nx - 1);
        let j = (t.floor().max(0.0) as usize).min(self.ny - 1);
        let (ls, lt) = (s - i as f64, t - j as f64);
        Some(2 * (i * self.ny + j) + usize::from(ls + lt > 1.0))
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|k| self.nodes[k]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// The three edge midpoints of triangle `t`, opposite to vertices 2, 0, 1.
    pub fn edge_midpoints(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t].map(|k| self.nodes[k]);
        let mid = |p: [f64; 2], q: [f64; 2]| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        [mid(a, b), mid(b, c), mid(c, a)]
    }

    /// `∫ η_k` for every node.
    pub fn node_integrals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_nodes()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &k in tri {
                out[k] += self.areas[t] / 3.0;
            }
        }
        out
    }

    /// Gradient of the P1 field with nodal values `u` on triangle `t`.
    pub fn gradient(&self, u: &[f64], t: usize) -> [f64; 2] {
        let g = &self.grads[t];
        let tri = &self.triangles[t];
        let mut out = [0.0; 2];
        for a in 0..3 {
            out[0] += u[tri[a]] * g[a][0];
            out[1] += u[tri[a]] * g[a][1];
        }
        out
    }

    /// Barycentric coordinates of `x` in triangle `t`.
    pub fn barycentric(&self, t: usize, x: [f64; 2]) -> [f64; 3] {
        let tri = &self.triangles[t];
        let a = self.nodes[tri[0]];
        let g = &self.grads[t];
        let l1 = g[1][0] * (x[0] - a[0]) + g[1][1] * (x[1] - a[1]);
        let l2 = g[2][0] * (x[0] - a[0]) + g[2][1] * (x[1] - a[1]);
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Meshes of `Ω₋` and `Ω₊` with duplicated nodes on `x1 = 0`.
#[derive(Debug, Clone)]
pub struct TransmissionMesh {
    pub minus: SideMesh,
    pub plus: SideMesh,
    pub h: f64,
}

impl TransmissionMesh {
    pub fn side(&self, side: Side) -> &SideMesh {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    pub fn n_interface(&self) -> usize {
        self.plus.interface.len()
    }

    /// `x2` coordinates of the interface nodes.
    pub fn interface_x2(&self) -> Vec<f64> {
        self.plus.interface.iter().map(|&k| self.plus.nodes[k][1]).collect()
    }
}

pub fn build_mesh(bounds_minus: Rect, bounds_plus: Rect, h: f64) -> Result<TransmissionMesh, FemError> {
    if bounds_minus.x1.1 != 0.0 || bounds_plus.x1.0 != 0.0 {
        return Err(FemError::Config("rectangles must meet at x1 = 0".into()));
    }
    if bounds_minus.x2 != bounds_plus.x2 {
        return Err(FemError::Config("rectangles must share the whole interface segment".into()));
    }
    if !(bounds_minus.width() > 0.0 && bounds_plus.width() > 0.0 && bounds_minus.height() > 0.0) {
        return Err(FemError::Config("degenerate rectangle".into()));
    }
    let minus = SideMesh::new(Side::Minus, bounds_minus, h)?;
    let plus = SideMesh::new(Side::Plus, bounds_plus, h)?;
    Ok(TransmissionMesh { minus, plus, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_squares_with_unit_step() {
        let m = build_mesh(Rect::new((-1.0, 0.0), (0.0, 1.0)), Rect::new((0.0, 1.0), (0.0, 1.0)), 1.0).unwrap();
        for s in [&m.minus, &m.plus] {
            assert_eq!(s.n_nodes(), 4);
            assert_eq!(s.n_triangles(), 2);
            assert_eq!(s.interface.len(), 2);
        }
    }

    #[test]
    fn paper_bounds_counts() {
        let m = build_mesh(Rect::new((-6.0, 0.0), (-6.0, 6.0)), Rect::new((0.0, 6.0), (-6.0, 6.0)), 0.25).unwrap();
        assert_eq!(m.plus.n_nodes(), 25 * 49);
        assert_eq!(m.plus.n_triangles(), 2 * 24 * 48);
        let fine = build_mesh(m.minus.rect, m.plus.rect, 0.125).unwrap();
        assert_eq!(fine.minus.n_triangles(), 4 * m.minus.n_triangles());
    }

    #[test]
    fn interface_nodes_coincide_and_are_sorted() {
        let m = build_mesh(Rect::new((-1.0, 0.0), (-1.0, 2.0)), Rect::new((0.0, 2.0), (-1.0, 2.0)), 0.25).unwrap();
        for (a, b) in m.minus.interface.iter().zip(&m.plus.interface) {
            assert_eq!(m.minus.nodes[*a], m.plus.nodes[*b]);
            assert_eq!(m.minus.nodes[*a][0], 0.0);
        }
        assert!(m.interface_x2().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn no_triangle_crosses_interface_and_all_congruent() {
        let m = build_mesh(Rect::new((-1.0, 0.0), (0.0, 1.0)), Rect::new((0.0, 1.0), (0.0, 1.0)), 0.25).unwrap();
        for s in [&m.minus, &m.plus] {
            for (t, tri) in s.triangles.iter().enumerate() {
                let xs = tri.map(|k| s.nodes[k][0]);
                assert!(xs.iter().all(|&x| x <= 0.0) || xs.iter().all(|&x| x >= 0.0));
                assert!((s.areas[t] - 0.5 * 0.0625).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn non_divisible_step_is_rejected() {
        let r = build_mesh(Rect::new((-1.0, 0.0), (0.0, 1.0)), Rect::new((0.0, 1.0), (0.0, 1.0)), 0.3);
        assert!(matches!(r, Err(FemError::Config(_))));
    }

    #[test]
    fn boundary_edges_cover_outer_boundary() {
        let m = build_mesh(Rect::new((-2.0, 0.0), (0.0, 1.0)), Rect::new((0.0, 1.0), (0.0, 1.0)), 0.5).unwrap();
        let len: f64 = m.minus.boundary.iter().map(|e| e.length).sum();
        assert!((len - (2.0 + 2.0 + 1.0)).abs() < 1e-14);
        for e in &m.minus.boundary {
            assert!(e.normal[0] <= 0.0, "no outer edge on the interface");
            let tri = m.minus.triangles[e.triangle];
            assert!(e.nodes.iter().all(|n| tri.contains(n)));
        }
        for e in &m.plus.boundary {
            assert!(e.normal[0] >= 0.0);
            let tri = m.plus.triangles[e.triangle];
            assert!(e.nodes.iter().all(|n| tri.contains(n)));
        }
    }

    #[test]
    fn locate_and_barycentric() {
        let s = SideMesh::new(Side::Plus, Rect::new((0.0, 1.0), (0.0, 1.0)), 0.5).unwrap();
        let x = [0.4, 0.3];
        let t = s.locate(x).unwrap();
        let l = s.barycentric(t, x);
        assert!(l.iter().all(|&v| v >= -1e-14));
        let p = s.triangles[t].map(|k| s.nodes[k]);
        let back = [0, 1].map(|d| l[0] * p[0][d] + l[1] * p[1][d] + l[2] * p[2][d]);
        assert!((back[0] - x[0]).abs() < 1e-14 && (back[1] - x[1]).abs() < 1e-14);
        assert!(s.locate([1.2, 0.3]).is_none());
    }
}
