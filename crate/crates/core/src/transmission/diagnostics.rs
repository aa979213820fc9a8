use serde::Serialize;

use crate::ansatz::{norms_on, NormDomain, DEFAULT_RESOLUTION};
use crate::fem::{FemField, SideMesh};
use crate::profile::Side;
use crate::quadrature::{GL2_UNIT, TRI7};
use crate::sparse::{CsrMatrix, Factored};

use super::problem::{flux, project_off_constants, SolverState, Transmission};
use super::{OuterBoundary, SolverError};

/// Terms on the right of the a-priori estimate with `α = p = 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateTerms {
    #[serde(rename = "U0_L4_4")]
    pub u0_l4_4: f64,
    #[serde(rename = "b_L2_2")]
    pub b_l2_2: f64,
    #[serde(rename = "b_L1log_2")]
    pub b_l1log_2: f64,
}

impl EstimateTerms {
    /// `2‖U₀‖₄⁴ + ‖b‖₂² + |||b|||²`; the `U₀` term appears once for each exponent.
    pub fn total(&self) -> f64 {
        2.0 * self.u0_l4_4 + self.b_l2_2 + self.b_l1log_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditReport {
    /// `∫|∇φ|² + ∫|U₀+∇φ|²|∇φ|²`.
    pub lhs_22: f64,
    pub rhs_terms: EstimateTerms,
    /// `lhs_22 / rhs_terms.total()`; NaN when both vanish.
    pub ratio: f64,
    #[serde(rename = "energy_J_phi")]
    pub energy_j_phi: f64,
    #[serde(rename = "energy_J_0")]
    pub energy_j_0: f64,
    /// Largest difference of the tangential derivatives across the interface.
    pub jump_tangential: f64,
    /// `L²` norm over the interface of the jump of `D₁`.
    pub jump_flux: f64,
}

/// Summary written after a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinalRecord {
    #[serde(rename = "norm_grad_phi_L2")]
    pub norm_grad_phi_l2: f64,
    #[serde(rename = "div_D_norm")]
    pub div_d_norm: f64,
    #[serde(rename = "energy_J_phi")]
    pub energy_j_phi: f64,
    #[serde(rename = "energy_J_0")]
    pub energy_j_0: f64,
    pub jump_flux: f64,
}

/// Triangles adjacent to interface segment `k` on each side.
fn interface_triangles(m: &SideMesh, k: usize) -> usize {
    match m.side {
        Side::Minus => 2 * ((m.nx - 1) * m.ny + k) + 1,
        Side::Plus => 2 * k,
    }
}

impl Transmission<'_> {
    /// Mass-weighted norm of `r_J = ∫ D(φ) · ∇η_J` over continuous hat functions.
    ///
    /// Uses the seven-point rule with `ε₁` and `U₀` at every point, so it also
    /// sees the quadrature and coefficient-freezing errors of the solve.
    pub fn div_d_norm(&self, phi: &FemField) -> f64 {
        let p = self.problem;
        let mut r = vec![0.0; p.n_merged];
        let mut mass = vec![0.0; p.n_merged];
        for s in [Side::Plus, Side::Minus] {
            let m = p.mesh.side(s);
            let map = p.merged.get(s);
            let (e1c, e3c) = (p.profile.eps1_on(s), p.profile.eps3_on(s));
            let u = phi.values(s);
            for (t, tri) in m.triangles.iter().enumerate() {
                let g = m.gradient(u, t);
                let pts = tri.map(|k| m.nodes[k]);
                let mut d = [0.0; 2];
                for (l, w) in TRI7 {
                    let x = [0, 1].map(|i| l[0] * pts[0][i] + l[1] * pts[1][i] + l[2] * pts[2][i]);
                    let f = flux(e1c.value(x[0]), e3c.value(x[0]), self.ansatz.eval_u0_on(s, x), g, true);
                    d[0] += w * f[0];
                    d[1] += w * f[1];
                }
                for a in 0..3 {
                    let gr = m.grads[t][a];
                    r[map[tri[a]]] += m.areas[t] * (d[0] * gr[0] + d[1] * gr[1]);
                    mass[map[tri[a]]] += m.areas[t] / 3.0;
                }
            }
            if p.outer == OuterBoundary::GradientNeumann {
                for edge in &m.boundary {
                    let g = m.gradient(u, edge.triangle);
                    let [a, b] = edge.nodes.map(|k| m.nodes[k]);
                    for (sq, w) in GL2_UNIT {
                        let x = [a[0] + sq * (b[0] - a[0]), a[1] + sq * (b[1] - a[1])];
                        let f = flux(e1c.value(x[0]), e3c.value(x[0]), self.ansatz.eval_u0_on(s, x), g, false);
                        let v = w * edge.length * (f[0] * edge.normal[0] + f[1] * edge.normal[1]);
                        r[map[edge.nodes[0]]] -= v * (1.0 - sq);
                        r[map[edge.nodes[1]]] -= v * sq;
                    }
                }
            }
        }
        r.iter().zip(&mass).map(|(v, w)| v * v / w).sum::<f64>().sqrt()
    }

    /// Discrete `𝒥(φ) = ∫ ε₃|U₀+∇φ|⁴/4 + ∫ ε₁|∇φ|²/2 + ∫ ε₁U₀·∇φ`.
    ///
    /// Same quadrature as the load, so its gradient is [`Transmission::weak_gradient`].
    pub fn energy(&self, phi: &FemField) -> f64 {
        let p = self.problem;
        let mut j = 0.0;
        for s in [Side::Plus, Side::Minus] {
            let m = p.mesh.side(s);
            let e1c = p.profile.eps1_on(s);
            let (uq, e1, e3) = (self.u0_q.get(s), p.eps1_q.get(s), p.eps3_q.get(s));
            let u = phi.values(s);
            for t in 0..m.n_triangles() {
                let g = m.gradient(u, t);
                let a = m.areas[t];
                j += 0.5 * e1c.value(m.centroid(t)[0]) * a * (g[0] * g[0] + g[1] * g[1]);
                for q in 0..3 {
                    let w = uq[t][q];
                    let v = [w[0] + g[0], w[1] + g[1]];
                    let n2 = v[0] * v[0] + v[1] * v[1];
                    j += a / 3.0 * (0.25 * e3[t][q] * n2 * n2 + e1[t][q] * (w[0] * g[0] + w[1] * g[1]));
                }
            }
        }
        j
    }

    /// `max_k |⟦∂₂φ⟧|` over the interface segments.
    pub fn jump_tangential(&self, phi: &FemField) -> f64 {
        let mesh = &self.problem.mesh;
        let (up, um) = (phi.values(Side::Plus), phi.values(Side::Minus));
        let (ip, im) = (&mesh.plus.interface, &mesh.minus.interface);
        (0..ip.len() - 1)
            .map(|k| ((up[ip[k + 1]] - up[ip[k]]) - (um[im[k + 1]] - um[im[k]])).abs() / mesh.h)
            .fold(0.0, f64::max)
    }

    /// `‖⟦D₁⟧‖_{L²(Γ)}` from the triangles touching the interface.
    pub fn jump_flux(&self, phi: &FemField) -> f64 {
        let p = self.problem;
        let mesh = &p.mesh;
        let x2 = mesh.interface_x2();
        let mut s2 = 0.0;
        for k in 0..x2.len() - 1 {
            let gp = mesh.plus.gradient(phi.values(Side::Plus), interface_triangles(&mesh.plus, k));
            let gm = mesh.minus.gradient(phi.values(Side::Minus), interface_triangles(&mesh.minus, k));
            let len = x2[k + 1] - x2[k];
            for (sq, w) in GL2_UNIT {
                let x = [0.0, x2[k] + sq * len];
                let d1 = |s: Side, g: [f64; 2]| {
                    let e1 = p.profile.eps1_on(s).value(0.0);
                    let e3 = p.profile.eps3_on(s).value(0.0);
                    flux(e1, e3, self.ansatz.eval_u0_on(s, x), g, true)[0]
                };
                let jump = d1(Side::Plus, gp) - d1(Side::Minus, gm);
                s2 += w * len * jump * jump;
            }
        }
        s2.sqrt()
    }

    /// `∫|∇φ|² + ∫|U₀+∇φ|²|∇φ|²` with the load quadrature.
    fn lhs_22(&self, phi: &FemField) -> f64 {
        let p = self.problem;
        let mut total = 0.0;
        for s in [Side::Plus, Side::Minus] {
            let m = p.mesh.side(s);
            let uq = self.u0_q.get(s);
            for t in 0..m.n_triangles() {
                let g = phi.gradient(s, t);
                let g2 = g[0] * g[0] + g[1] * g[1];
                let mut weighted = 0.0;
                for w in &uq[t] {
                    let v = [w[0] + g[0], w[1] + g[1]];
                    weighted += (v[0] * v[0] + v[1] * v[1]) * g2 / 3.0;
                }
                total += m.areas[t] * (g2 + weighted);
            }
        }
        total
    }

    /// Both sides of the a-priori estimate, the energies and the interface jumps.
    ///
    /// The ansatz norms are taken over the computational rectangle.
    pub fn audit(&self, state: &SolverState) -> Result<AuditReport, SolverError> {
        let mesh = &self.problem.mesh;
        let domain = NormDomain { x1: (mesh.minus.rect.x1.0, mesh.plus.rect.x1.1), x2: mesh.plus.rect.x2 };
        let n = norms_on(self.ansatz, &domain, DEFAULT_RESOLUTION)?;
        let rhs_terms = EstimateTerms { u0_l4_4: n.u0_l4.powi(4), b_l2_2: n.b_l2.powi(2), b_l1log_2: n.b_l1log.powi(2) };
        let lhs_22 = self.lhs_22(&state.phi);
        let total = rhs_terms.total();
        let ratio = if total == 0.0 { f64::NAN } else { lhs_22 / total };
        let zero = FemField::zeros(mesh.clone());
        Ok(AuditReport {
            lhs_22,
            rhs_terms,
            ratio,
            energy_j_phi: self.energy(&state.phi),
            energy_j_0: self.energy(&zero),
            jump_tangential: self.jump_tangential(&state.phi),
            jump_flux: self.jump_flux(&state.phi),
        })
    }

    pub fn final_record(&self, state: &SolverState) -> FinalRecord {
        let zero = FemField::zeros(self.problem.mesh.clone());
        FinalRecord {
            norm_grad_phi_l2: state.phi.grad_l2_norm(),
            div_d_norm: self.div_d_norm(&state.phi),
            energy_j_phi: self.energy(&state.phi),
            energy_j_0: self.energy(&zero),
            jump_flux: self.jump_flux(&state.phi),
        }
    }

    /// One-shot solve of the problem without the Kerr term on a continuous P1 space.
    ///
    /// Both copies of each interface node share one unknown. The load is made
    /// mean-free, the first equation is replaced by a pin and the result is
    /// shifted to zero mean per side. Gradients agree with the transmission
    /// solve of the same linear problem.
    pub fn solve_linear_continuous(&self) -> Result<FemField, SolverError> {
        let p = self.problem;
        let n = p.n_merged;
        let np = p.mesh.plus.n_nodes();
        let load = self.load(&FemField::zeros(p.mesh.clone()), false);
        let mut trip = Vec::new();
        let mut rhs = vec![0.0; n];
        for (s, off) in [(Side::Plus, 0), (Side::Minus, np)] {
            let map = p.merged.get(s);
            trip.extend(p.stiffness.get(s).triplets().into_iter().map(|(i, j, v)| (map[i], map[j], v)).filter(|t| t.0 != 0));
            for i in 0..map.len() {
                rhs[map[i]] += load[off + i];
            }
        }
        project_off_constants(&mut rhs);
        trip.push((0, 0, 1.0));
        rhs[0] = 0.0;
        let a = CsrMatrix::from_triplets(n, n, &trip);
        let x = Factored::new(&a)
            .and_then(|f| f.solve(&rhs))
            .map_err(|source| SolverError::Iteration { iteration: 1, source })?;
        let pick = |s: Side| p.merged.get(s).iter().map(|&j| x[j]).collect::<Vec<_>>();
        Ok(FemField::new(p.mesh.clone(), pick(Side::Minus), pick(Side::Plus))?.shifted_to_zero_mean())
    }
}
