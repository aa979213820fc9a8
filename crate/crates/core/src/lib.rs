//! Localized TM interface modes, the Kerr wavepacket ansatz built on them, and
//! a P1 finite-element solver for the quasilinear transmission problem that
//! corrects the ansatz.
//!
//! The pieces, in the order they are used:
//!
//! - [`mode`]: the dispersion problem on a 1D grid and the fundamental mode,
//! - [`ansatz`]: the field `U₀` built from a mode and an envelope, and its norms,
//! - [`fem`]: meshes, assembly and constrained sparse solves,
//! - [`transmission`]: the fixed-point solver and its diagnostics,
//! - [`harness`]: TOML-driven experiments with CSV, JSON and SVG output.
//!
//! ```no_run
//! use std::sync::Arc;
//! use kerr_interface::prelude::*;
//!
//! let profile = DielectricProfile::fig1();
//! let grid = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();
//! let mode = Arc::new(fundamental_mode(&profile, 3.0, &grid).unwrap().expect("mode"));
//! let ansatz = AnsatzField::new(mode, profile.clone(), Envelope::gaussian(5e6), 3e-4).unwrap();
//!
//! let config = SolverConfig::default();
//! let problem = TransmissionProblem::new(&config, &profile).unwrap();
//! let state = problem.bind(&ansatz).solve(&config).unwrap();
//! println!("|grad phi|_2 = {:.3e} after {} iterations", state.phi.grad_l2_norm(), state.n);
//! ```

pub mod ansatz;
pub mod expr;
pub mod fem;
pub mod grid;
pub mod harness;
pub mod mode;
pub mod profile;
pub mod quadrature;
pub mod sparse;
pub mod transmission;

pub mod prelude {
    pub use crate::ansatz::{AnsatzField, Envelope};
    pub use crate::fem::{FemField, Rect};
    pub use crate::grid::Grid1D;
    pub use crate::mode::{fundamental_mode, solve_dispersion, InterfaceMode};
    pub use crate::profile::{DielectricProfile, Side};
    pub use crate::transmission::{OuterBoundary, SolverConfig, SolverState, TransmissionProblem};
}
