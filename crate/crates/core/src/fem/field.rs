use std::sync::Arc;

use crate::profile::Side;
use crate::quadrature::TRI7;

use super::mesh::{SideMesh, TransmissionMesh};
use super::FemError;

/// P1 field with independent nodal values on each side of the interface.
#[derive(Debug, Clone)]
pub struct FemField {
    mesh: Arc<TransmissionMesh>,
    minus: Vec<f64>,
    plus: Vec<f64>,
}

impl FemField {
    pub fn new(mesh: Arc<TransmissionMesh>, minus: Vec<f64>, plus: Vec<f64>) -> Result<Self, FemError> {
        if minus.len() != mesh.minus.n_nodes() || plus.len() != mesh.plus.n_nodes() {
            return Err(FemError::Shape(format!(
                "field has {}/{} values for {}/{} nodes",
                minus.len(),
                plus.len(),
                mesh.minus.n_nodes(),
                mesh.plus.n_nodes()
            )));
        }
        if minus.iter().chain(&plus).any(|v| !v.is_finite()) {
            return Err(FemError::NonFinite);
        }
        Ok(Self { mesh, minus, plus })
    }

    pub fn zeros(mesh: Arc<TransmissionMesh>) -> Self {
        let (a, b) = (mesh.minus.n_nodes(), mesh.plus.n_nodes());
        Self { mesh, minus: vec![0.0; a], plus: vec![0.0; b] }
    }

    /// Nodal interpolant of `f` on both sides.
    pub fn interpolate(mesh: Arc<TransmissionMesh>, f: impl Fn(Side, [f64; 2]) -> f64) -> Result<Self, FemError> {
        let minus = mesh.minus.nodes.iter().map(|&x| f(Side::Minus, x)).collect();
        let plus = mesh.plus.nodes.iter().map(|&x| f(Side::Plus, x)).collect();
        Self::new(mesh, minus, plus)
    }

    pub fn mesh(&self) -> &Arc<TransmissionMesh> {
        &self.mesh
    }

    pub fn values(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// Constant gradient on triangle `t` of the given side.
    pub fn gradient(&self, side: Side, t: usize) -> [f64; 2] {
        self.mesh.side(side).gradient(self.values(side), t)
    }

    /// Value at `x` using the given side's mesh; `None` outside it.
    pub fn eval_on(&self, side: Side, x: [f64; 2]) -> Option<f64> {
        let m = self.mesh.side(side);
        let t = m.locate(x)?;
        let l = m.barycentric(t, x);
        let u = self.values(side);
        Some(m.triangles[t].iter().zip(l).map(|(&k, w)| w * u[k]).sum())
    }

    /// Value at `x`, with `x1 = 0` read from the plus side.
    pub fn eval(&self, x: [f64; 2]) -> Option<f64> {
        self.eval_on(Side::of(x[0]), x)
    }

    /// `‖∇φ‖₂` over both sides.
    pub fn grad_l2_norm(&self) -> f64 {
        let mut s = 0.0;
        for side in [Side::Minus, Side::Plus] {
            let m = self.mesh.side(side);
            for t in 0..m.n_triangles() {
                let g = self.gradient(side, t);
                s += m.areas[t] * (g[0] * g[0] + g[1] * g[1]);
            }
        }
        s.sqrt()
    }

    /// `‖∇φ − ∇ψ‖₂` over both sides.
    pub fn grad_l2_distance(&self, other: &FemField) -> f64 {
        let mut s = 0.0;
        for side in [Side::Minus, Side::Plus] {
            let m = self.mesh.side(side);
            for t in 0..m.n_triangles() {
                let (a, b) = (self.gradient(side, t), other.gradient(side, t));
                s += m.areas[t] * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2));
            }
        }
        s.sqrt()
    }

    /// `‖φ − ψ‖_{H¹}` (full norm) with lumped mass for the `L²` part.
    pub fn h1_distance(&self, other: &FemField) -> f64 {
        let mut s = 0.0;
        for side in [Side::Minus, Side::Plus] {
            let m = self.mesh.side(side);
            let d: Vec<f64> = self.values(side).iter().zip(other.values(side)).map(|(a, b)| a - b).collect();
            for t in 0..m.n_triangles() {
                let g = m.gradient(&d, t);
                s += m.areas[t] * (g[0] * g[0] + g[1] * g[1]);
            }
            s += m.node_integrals().iter().zip(&d).map(|(w, v)| w * v * v).sum::<f64>();
        }
        s.sqrt()
    }

    /// `(1 − θ) self + θ next`.
    pub fn relaxed(&self, next: &FemField, theta: f64) -> FemField {
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (1.0 - theta) * x + theta * y).collect();
        FemField { mesh: self.mesh.clone(), minus: mix(&self.minus, &next.minus), plus: mix(&self.plus, &next.plus) }
    }

    /// Subtracts from each side its mean value, leaving gradients unchanged.
    pub fn shifted_to_zero_mean(mut self) -> Self {
        for side in [Side::Minus, Side::Plus] {
            let m = self.mesh.side(side);
            let w = m.node_integrals();
            let u = match side {
                Side::Minus => &mut self.minus,
                Side::Plus => &mut self.plus,
            };
            let mean = u.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
            if mean != 0.0 {
                for v in u.iter_mut() {
                    *v -= mean;
                }
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.minus.iter().chain(&self.plus).all(|&v| v == 0.0)
    }
}

/// `‖u_h − u‖_{L²}` on one side with the seven-point rule.
pub fn l2_error(mesh: &SideMesh, u: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let mut s = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|k| mesh.nodes[k]);
        for (l, w) in TRI7 {
            let x = [0, 1].map(|d| l[0] * p[0][d] + l[1] * p[1][d] + l[2] * p[2][d]);
            let uh = l[0] * u[tri[0]] + l[1] * u[tri[1]] + l[2] * u[tri[2]];
            s += w * mesh.areas[t] * (uh - exact(x)).powi(2);
        }
    }
    s.sqrt()
}

/// `‖∇u_h − ∇u‖_{L²}` on one side with the seven-point rule.
pub fn h1_seminorm_error(mesh: &SideMesh, u: &[f64], exact_grad: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let mut s = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|k| mesh.nodes[k]);
        let g = mesh.gradient(u, t);
        for (l, w) in TRI7 {
            let x = [0, 1].map(|d| l[0] * p[0][d] + l[1] * p[1][d] + l[2] * p[2][d]);
            let e = exact_grad(x);
            s += w * mesh.areas[t] * ((g[0] - e[0]).powi(2) + (g[1] - e[1]).powi(2));
        }
    }
    s.sqrt()
}
