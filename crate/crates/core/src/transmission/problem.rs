use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::ansatz::AnsatzField;
use crate::fem::{
    assemble_boundary_load, assemble_flux_load, assemble_interface_mass, assemble_stiffness, build_mesh, FemField,
    SideMesh, TransmissionMesh,
};
use crate::profile::{DielectricProfile, Side};
use crate::sparse::{CsrMatrix, Factored};

use super::{OuterBoundary, SolverConfig, SolverError};

const SIDES: [Side; 2] = [Side::Plus, Side::Minus];

/// A pair of per-side values, plus side first as in the unknown layout.
#[derive(Debug, Clone)]
pub(crate) struct PerSide<T> {
    pub plus: T,
    pub minus: T,
}

impl<T> PerSide<T> {
    pub fn build(mut f: impl FnMut(Side) -> T) -> Self {
        Self { plus: f(Side::Plus), minus: f(Side::Minus) }
    }

    pub fn get(&self, side: Side) -> &T {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

/// Mesh, coefficients and the factored coupled system; independent of `U₀`.
///
/// Unknowns are ordered `[Φ⁺; Φ⁻; G]`. Rows are the two weak-form blocks, one
/// tangential-jump row per interface segment and the two zero-mean rows, which
/// is one row more than there are unknowns.
pub struct TransmissionProblem {
    pub(crate) mesh: Arc<TransmissionMesh>,
    pub(crate) profile: DielectricProfile,
    pub(crate) outer: OuterBoundary,
    pub(crate) stiffness: PerSide<CsrMatrix>,
    pub(crate) interface_mass: CsrMatrix,
    pub(crate) node_mass: PerSide<Vec<f64>>,
    /// `ε₁`, `ε₃` at the edge midpoints of every triangle.
    pub(crate) eps1_q: PerSide<Vec<[f64; 3]>>,
    pub(crate) eps3_q: PerSide<Vec<[f64; 3]>>,
    /// Continuous numbering that identifies the two copies of each interface node.
    pub(crate) merged: PerSide<Vec<usize>>,
    pub(crate) n_merged: usize,
    system: CsrMatrix,
    factored: Factored,
}

impl std::fmt::Debug for TransmissionProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransmissionProblem")
            .field("h", &self.mesh.h)
            .field("unknowns", &self.system.ncols())
            .field("outer", &self.outer)
            .finish()
    }
}

fn midpoint_values(m: &SideMesh, f: impl Fn(f64) -> f64) -> Vec<[f64; 3]> {
    (0..m.n_triangles()).map(|t| m.edge_midpoints(t).map(|x| f(x[0]))).collect()
}

impl TransmissionProblem {
    pub fn new(config: &SolverConfig, profile: &DielectricProfile) -> Result<Self, SolverError> {
        config.validate()?;
        let mesh = Arc::new(build_mesh(config.minus, config.plus, config.h)?);
        Self::on_mesh(mesh, profile, config.outer_boundary)
    }

    pub fn on_mesh(mesh: Arc<TransmissionMesh>, profile: &DielectricProfile, outer: OuterBoundary) -> Result<Self, SolverError> {
        let xs = [&mesh.minus, &mesh.plus].into_iter().flat_map(|m| m.nodes.iter().map(|p| p[0]));
        profile.validate_on(xs).map_err(|e| SolverError::Config(e.to_string()))?;

        let stiffness = PerSide::build(|s| {
            let e = profile.eps1_on(s);
            assemble_stiffness(mesh.side(s), |x| e.value(x[0]))
        });
        let interface_mass = assemble_interface_mass(&mesh);
        let node_mass = PerSide::build(|s| mesh.side(s).node_integrals());
        let eps1_q = PerSide::build(|s| midpoint_values(mesh.side(s), |x| profile.eps1_on(s).value(x)));
        let eps3_q = PerSide::build(|s| midpoint_values(mesh.side(s), |x| profile.eps3_on(s).value(x)));

        let (np, nm, m) = (mesh.plus.n_nodes(), mesh.minus.n_nodes(), mesh.n_interface());
        let mut minus_map = vec![usize::MAX; nm];
        for (k, &i) in mesh.minus.interface.iter().enumerate() {
            minus_map[i] = mesh.plus.interface[k];
        }
        let mut next = np;
        for v in minus_map.iter_mut().filter(|v| **v == usize::MAX) {
            *v = next;
            next += 1;
        }
        let merged = PerSide { plus: (0..np).collect(), minus: minus_map };

        let g0 = np + nm;
        let mut trip = Vec::new();
        trip.extend(stiffness.plus.triplets());
        trip.extend(stiffness.minus.triplets().into_iter().map(|(i, j, v)| (np + i, np + j, v)));
        for (k, l, v) in interface_mass.triplets() {
            trip.push((mesh.plus.interface[k], g0 + l, v));
            trip.push((np + mesh.minus.interface[k], g0 + l, -v));
        }
        let h = mesh.h;
        let mut row = g0;
        for k in 0..m - 1 {
            let (p0, p1) = (mesh.plus.interface[k], mesh.plus.interface[k + 1]);
            let (q0, q1) = (mesh.minus.interface[k], mesh.minus.interface[k + 1]);
            trip.extend([(row, p1, 1.0 / h), (row, p0, -1.0 / h), (row, np + q1, -1.0 / h), (row, np + q0, 1.0 / h)]);
            row += 1;
        }
        let n_jump = row;
        trip.extend(node_mass.plus.iter().enumerate().map(|(j, &w)| (row, j, w)));
        trip.extend(node_mass.minus.iter().enumerate().map(|(j, &w)| (row + 1, np + j, w)));
        let system = CsrMatrix::from_triplets(row + 2, g0 + m, &trip);

        // What gets factored: the weak rows add up to zero, so the last one is
        // implied once the load is projected off constants and can go. The two
        // dense mean rows would ruin the sparse ordering, so each side is pinned
        // at one node instead and shifted to zero mean after the solve.
        let drop = g0 - 1;
        let mut square: Vec<_> = trip
            .into_iter()
            .filter(|t| t.0 != drop && t.0 < n_jump)
            .map(|(i, j, v)| (if i > drop { i - 1 } else { i }, j, v))
            .collect();
        square.push((n_jump - 1, 0, 1.0));
        square.push((n_jump, np, 1.0));
        let square = CsrMatrix::from_triplets(n_jump + 1, g0 + m, &square);
        let factored = Factored::new(&square).map_err(|e| SolverError::Iteration { iteration: 0, source: e })?;
        Ok(Self {
            mesh,
            profile: profile.clone(),
            outer,
            stiffness,
            interface_mass,
            node_mass,
            eps1_q,
            eps3_q,
            merged,
            n_merged: next,
            system,
            factored,
        })
    }

    pub fn mesh(&self) -> &Arc<TransmissionMesh> {
        &self.mesh
    }

    pub fn profile(&self) -> &DielectricProfile {
        &self.profile
    }

    pub fn outer_boundary(&self) -> OuterBoundary {
        self.outer
    }

    /// The coupled matrix (rows: weak forms, jumps, means).
    pub fn system_matrix(&self) -> &CsrMatrix {
        &self.system
    }

    pub(crate) fn n_weak(&self) -> usize {
        self.mesh.plus.n_nodes() + self.mesh.minus.n_nodes()
    }

    /// Precomputes `U₀` at the quadrature points of every triangle.
    pub fn bind<'a>(&'a self, ansatz: &'a AnsatzField) -> Transmission<'a> {
        let u0_q = PerSide::build(|s| {
            let m = self.mesh.side(s);
            (0..m.n_triangles()).map(|t| m.edge_midpoints(t).map(|x| ansatz.eval_u0_on(s, x))).collect()
        });
        Transmission { problem: self, ansatz, u0_q }
    }
}

/// One Picard record, as written to the iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    pub residual: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub n: usize,
    pub phi: FemField,
    /// Interface flux coefficients, one per interface node.
    pub g: Vec<f64>,
    /// `res(φ₁), …, res(φₙ)`.
    pub residuals: Vec<f64>,
    /// `res(φ₀)`, the reference for the stopping rule.
    pub initial_residual: f64,
    pub converged: bool,
}

impl SolverState {
    /// `res(φₙ) / res(φ₀)`, zero when both vanish.
    pub fn relative_residual(&self) -> f64 {
        let last = self.residuals.last().copied().unwrap_or(self.initial_residual);
        if last == 0.0 {
            0.0
        } else {
            last / self.initial_residual
        }
    }
}

/// A [`TransmissionProblem`] bound to one ansatz field.
pub struct Transmission<'a> {
    pub(crate) problem: &'a TransmissionProblem,
    pub(crate) ansatz: &'a AnsatzField,
    pub(crate) u0_q: PerSide<Vec<[[f64; 2]; 3]>>,
}

/// `ε₁U + ε₃|U + g|²(U + g)`, optionally with `ε₁ g`.
#[inline]
pub(crate) fn flux(e1: f64, e3: f64, u: [f64; 2], g: [f64; 2], with_linear_g: bool) -> [f64; 2] {
    let v = [u[0] + g[0], u[1] + g[1]];
    let n2 = v[0] * v[0] + v[1] * v[1];
    let lin = if with_linear_g { v } else { u };
    [e1 * lin[0] + e3 * n2 * v[0], e1 * lin[1] + e3 * n2 * v[1]]
}

impl<'a> Transmission<'a> {
    pub fn problem(&self) -> &TransmissionProblem {
        self.problem
    }

    pub fn ansatz(&self) -> &AnsatzField {
        self.ansatz
    }

    /// Weak-form load `−∫ D_flux(φ) · ∇η` (plus outer boundary terms if enabled), ordered `[plus; minus]`.
    pub(crate) fn load(&self, phi: &FemField, kerr: bool) -> Vec<f64> {
        let p = self.problem;
        let mut out = Vec::with_capacity(p.n_weak());
        for s in SIDES {
            let m = p.mesh.side(s);
            let u = phi.values(s);
            let (uq, e1, e3) = (self.u0_q.get(s), p.eps1_q.get(s), p.eps3_q.get(s));
            let mut l = assemble_flux_load(m, |t, q| {
                let g = m.gradient(u, t);
                flux(e1[t][q], if kerr { e3[t][q] } else { 0.0 }, uq[t][q], g, false)
            });
            if p.outer == OuterBoundary::GradientNeumann {
                let b = assemble_boundary_load(m, |e, x| {
                    let edge = &m.boundary[e];
                    let g = m.gradient(u, edge.triangle);
                    let e3 = if kerr { p.profile.eps3_on(s).value(x[0]) } else { 0.0 };
                    let d = flux(p.profile.eps1_on(s).value(x[0]), e3, self.ansatz.eval_u0_on(s, x), g, false);
                    d[0] * edge.normal[0] + d[1] * edge.normal[1]
                });
                for (a, b) in l.iter_mut().zip(b) {
                    *a += b;
                }
            }
            out.extend(l);
        }
        out
    }

    /// `K Φ ± M_Γ G − load(φ)` on the weak rows, ordered `[plus; minus]`.
    pub fn weak_residual(&self, phi: &FemField, g: &[f64]) -> Vec<f64> {
        let p = self.problem;
        let mg = p.interface_mass.mul_vec(g);
        let mut r = self.weak_gradient(phi);
        let np = p.mesh.plus.n_nodes();
        for (k, v) in mg.iter().enumerate() {
            r[p.mesh.plus.interface[k]] += v;
            r[np + p.mesh.minus.interface[k]] -= v;
        }
        r
    }

    /// `K Φ − load(φ)`, which is the gradient of the discrete energy.
    pub fn weak_gradient(&self, phi: &FemField) -> Vec<f64> {
        let p = self.problem;
        let mut r = self.load(phi, true);
        for v in r.iter_mut() {
            *v = -*v;
        }
        let np = p.mesh.plus.n_nodes();
        for (s, off) in [(Side::Plus, 0), (Side::Minus, np)] {
            let k = p.stiffness.get(s).mul_vec(phi.values(s));
            for (i, v) in k.into_iter().enumerate() {
                r[off + i] += v;
            }
        }
        r
    }

    /// Mass-weighted norm of the weak residual after removing its mean.
    ///
    /// The weak rows sum to zero for any exact solution, so only the
    /// mean-free part is meaningful.
    pub fn residual_norm(&self, phi: &FemField, g: &[f64]) -> f64 {
        let p = self.problem;
        let mut r = self.weak_residual(phi, g);
        project_off_constants(&mut r);
        let mass = p.node_mass.plus.iter().chain(&p.node_mass.minus);
        r.iter().zip(mass).map(|(v, w)| v * v / w).sum::<f64>().sqrt()
    }

    pub fn initial_state(&self) -> SolverState {
        let phi = FemField::zeros(self.problem.mesh.clone());
        let g = vec![0.0; self.problem.mesh.n_interface()];
        let initial_residual = self.residual_norm(&phi, &g);
        SolverState { n: 0, phi, g, residuals: Vec::new(), initial_residual, converged: false }
    }

    fn split(&self, x: &[f64]) -> Result<(FemField, Vec<f64>), SolverError> {
        let p = self.problem;
        let (np, nm) = (p.mesh.plus.n_nodes(), p.mesh.minus.n_nodes());
        let phi = FemField::new(p.mesh.clone(), x[np..np + nm].to_vec(), x[..np].to_vec())?;
        Ok((phi, x[np + nm..].to_vec()))
    }

    pub fn step(&self, state: &SolverState, config: &SolverConfig) -> Result<SolverState, SolverError> {
        let p = self.problem;
        let n = state.n + 1;
        let mut b = self.load(&state.phi, true);
        if b.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Divergence(n));
        }
        project_off_constants(&mut b);
        b.pop();
        b.resize(p.system.nrows() - 1, 0.0);
        let x = p.factored.solve(&b).map_err(|source| SolverError::Iteration { iteration: n, source })?;
        let (hat, g_hat) = self.split(&x)?;
        let hat = hat.shifted_to_zero_mean();
        let theta = config.relaxation;
        let (phi, g) = if theta == 1.0 {
            (hat, g_hat)
        } else {
            let g = state.g.iter().zip(&g_hat).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
            (state.phi.relaxed(&hat, theta), g)
        };
        let res = self.residual_norm(&phi, &g);
        if !res.is_finite() {
            return Err(SolverError::Divergence(n));
        }
        let mut residuals = state.residuals.clone();
        residuals.push(res);
        let converged = res <= config.tol * state.initial_residual;
        Ok(SolverState { n, phi, g, residuals, initial_residual: state.initial_residual, converged })
    }

    pub fn solve(&self, config: &SolverConfig) -> Result<SolverState, SolverError> {
        self.solve_observed(config, |_| {})
    }

    /// Iterates from `φ₀ = 0`, reporting each step to `observer`.
    pub fn solve_observed(&self, config: &SolverConfig, mut observer: impl FnMut(&IterationRecord)) -> Result<SolverState, SolverError> {
        config.validate()?;
        let start = Instant::now();
        let mut state = self.initial_state();
        while state.n < config.max_iter {
            state = self.step(&state, config)?;
            let residual = *state.residuals.last().expect("one residual per step");
            log::debug!("iteration {}: residual {residual:.3e}", state.n);
            observer(&IterationRecord { n: state.n, residual, wall_time: start.elapsed().as_secs_f64() });
            if state.converged {
                break;
            }
        }
        Ok(state)
    }
}

/// Subtracts the mean so the vector is orthogonal to the all-ones vector.
pub(crate) fn project_off_constants(r: &mut [f64]) {
    if r.is_empty() {
        return;
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    for v in r.iter_mut() {
        *v -= mean;
    }
}
