//! Picard iteration for the quasilinear transmission problem on two rectangles.
//!
//! The unknowns are the nodal values `Φ⁺`, `Φ⁻` on each side and the normal
//! flux `G` on the interface. Each step solves a linear system whose matrix is
//! assembled and factored once; only the load depends on the previous iterate.
//!
//! ```no_run
//! use std::sync::Arc;
//! use kerr_interface::prelude::*;
//!
//! let profile = DielectricProfile::fig1();
//! let grid = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();
//! let mode = Arc::new(fundamental_mode(&profile, 3.0, &grid).unwrap().unwrap());
//! let ansatz = AnsatzField::new(mode, profile.clone(), Envelope::gaussian(5e6), 3e-4).unwrap();
//! let config = SolverConfig { h: 0.1, ..Default::default() };
//! let problem = TransmissionProblem::new(&config, &profile).unwrap();
//! let state = problem.bind(&ansatz).solve(&config).unwrap();
//! println!("{} iterations, |grad phi| = {:.3e}", state.n, state.phi.grad_l2_norm());
//! ```

mod diagnostics;
mod problem;

pub use diagnostics::{AuditReport, EstimateTerms, FinalRecord};
pub use problem::{IterationRecord, SolverState, Transmission, TransmissionProblem};

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzError, AnsatzField};
use crate::fem::{FemError, Rect};
use crate::profile::DielectricProfile;
use crate::sparse::LinearSolveError;

/// Outer boundary condition used when the load is integrated by parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OuterBoundary {
    /// `D · n = 0`: no outer boundary term.
    #[default]
    TotalFlux,
    /// `∂ₙφ = 0`: keeps `∫ (ε₁U₀ + ε₃|U₀+∇φ|²(U₀+∇φ)) · n η` on the outer boundary.
    GradientNeumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub eps: f64,
    pub h: f64,
    /// Stop once `res(φₙ) ≤ tol · res(φ₀)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Exponent of the nonlinearity; only the Kerr case 3 is implemented.
    pub p: u32,
    /// Relaxation `θ` in `φₙ₊₁ = (1 − θ) φₙ + θ φ̂`.
    pub relaxation: f64,
    pub outer_boundary: OuterBoundary,
    pub minus: Rect,
    pub plus: Rect,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 3e-4,
            h: 0.05,
            tol: 1e-8,
            max_iter: 50,
            p: 3,
            relaxation: 1.0,
            outer_boundary: OuterBoundary::TotalFlux,
            minus: Rect::new((-6.0, 0.0), (-6.0, 6.0)),
            plus: Rect::new((0.0, 6.0), (-6.0, 6.0)),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::Config(m));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if self.p != 3 {
            return bad(format!("only p = 3 is supported, got {}", self.p));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return bad(format!("relaxation must lie in (0, 1], got {}", self.relaxation));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error("linear solve failed in iteration {iteration}: {source}")]
    Iteration { iteration: usize, source: LinearSolveError },
    #[error("non-finite flux in iteration {0}")]
    Divergence(usize),
}

/// Picard step from `state`.
pub fn fixed_point_step(t: &Transmission<'_>, state: &SolverState, config: &SolverConfig) -> Result<SolverState, SolverError> {
    t.step(state, config)
}

/// Builds mesh and system for `config`, rescales `ansatz` to `config.eps` and iterates from `φ₀ = 0`.
pub fn solve(config: &SolverConfig, profile: &DielectricProfile, ansatz: &AnsatzField) -> Result<SolverState, SolverError> {
    config.validate()?;
    let problem = TransmissionProblem::new(config, profile)?;
    let ansatz = ansatz.with_eps(config.eps)?;
    problem.bind(&ansatz).solve(config)
}

#[cfg(test)]
mod tests;
