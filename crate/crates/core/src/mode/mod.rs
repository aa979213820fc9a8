//! TM interface modes of a dielectric with a jump at `x1 = 0`.
//!
//! ```no_run
//! use kerr_interface::prelude::*;
//!
//! let profile = DielectricProfile::fig1();
//! let grid = Grid1D::new(-40.0, 40.0, 1e-3).unwrap();
//! let mode = fundamental_mode(&profile, 3.0, &grid).unwrap().expect("localized mode");
//! println!("k0 = {:.6}", mode.k0);
//! ```

mod assemble;
mod eigen;
mod reconstruct;

pub use assemble::{kernel, InterfaceEigenproblem};
pub use eigen::{boundary_ratio, default_shift, solve_dispersion, solve_dispersion_with, DispersionOptions, EigenMethod, ModeCandidate};
pub use reconstruct::{reconstruct_mode, verify_mode, InterfaceMode, ModeReport};

use crate::grid::{Grid1D, GridError};
use crate::profile::{DielectricProfile, ProfileError};
use crate::sparse::LinearSolveError;

#[derive(Debug, thiserror::Error)]
pub enum ModeError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("omega0 must be finite and nonzero")]
    ZeroFrequency,
    #[error("grid with {0} points is too small to resolve the interface stencil")]
    GridTooSmall(usize),
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
    #[error("eigenvalue iteration failed: {0}")]
    Eigen(String),
}

/// Best-localized mode at `omega0`, reconstructed, or `None` when none decays.
pub fn fundamental_mode(profile: &DielectricProfile, omega0: f64, grid: &Grid1D) -> Result<Option<InterfaceMode>, ModeError> {
    let Some(c) = solve_dispersion(profile, omega0, grid, 1)?.into_iter().next() else {
        return Ok(None);
    };
    reconstruct_mode(&c.w3, grid, profile, omega0, c.k0).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> Grid1D {
        Grid1D::new(-20.0, 20.0, 0.01).unwrap()
    }

    #[test]
    fn fig1_mode_on_coarse_grid() {
        let p = DielectricProfile::fig1();
        let modes = solve_dispersion(&p, 3.0, &coarse(), 4).unwrap();
        assert!(!modes.is_empty());
        let m = &modes[0];
        assert!((m.k0 - 3.4386).abs() < 2e-3, "k0 = {}", m.k0);
        assert!(m.eigen_residual < 1e-8, "residual {}", m.eigen_residual);
        let i0 = coarse().interface_index();
        assert!(m.w3[i0] > 0.0);
        let max = m.w3.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!((max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_and_shift_invert_agree() {
        let p = DielectricProfile::fig1();
        let g = Grid1D::new(-16.0, 16.0, 0.02).unwrap();
        let mut opts = DispersionOptions { method: EigenMethod::Dense, ..Default::default() };
        let d = solve_dispersion_with(&p, 3.0, &g, 2, &opts).unwrap();
        opts.method = EigenMethod::ShiftInvert;
        let s = solve_dispersion_with(&p, 3.0, &g, 2, &opts).unwrap();
        assert!(!d.is_empty() && !s.is_empty());
        assert!((d[0].k_squared - s[0].k_squared).abs() < 1e-9 * d[0].k_squared);
        for (a, b) in d[0].w3.iter().zip(&s[0].w3) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn positive_piecewise_constant_has_no_mode() {
        let p = DielectricProfile::piecewise_constant(1.0, 2.0, 1.0);
        let g = Grid1D::new(-10.0, 10.0, 0.02).unwrap();
        for &om in &[1.0, 2.0, 3.0] {
            let modes = solve_dispersion(&p, om, &g, 4).unwrap();
            assert!(modes.is_empty(), "omega {om}: {:?}", modes.iter().map(|m| m.k0).collect::<Vec<_>>());
        }
    }

    #[test]
    fn mirrored_profile_gives_same_k0() {
        // the mirrored kernel decays like exp(-x/2), so truncate further out
        let p = DielectricProfile::fig1();
        let g = Grid1D::new(-60.0, 60.0, 0.01).unwrap();
        let a = solve_dispersion(&p, 3.0, &g, 1).unwrap();
        let b = solve_dispersion(&p.mirrored(), 3.0, &g, 1).unwrap();
        assert!((a[0].k0 - b[0].k0).abs() < 1e-4, "{} vs {}", a[0].k0, b[0].k0);
        let n = g.n_points;
        let err = (0..n).map(|i| (a[0].w3[i] - b[0].w3[n - 1 - i]).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "mirror mismatch {err}");
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let p = DielectricProfile::fig1();
        assert!(matches!(solve_dispersion(&p, 0.0, &coarse(), 1), Err(ModeError::ZeroFrequency)));
        let w = vec![0.0; coarse().n_points];
        assert!(matches!(reconstruct_mode(&w, &coarse(), &p, 0.0, 1.0), Err(ModeError::ZeroFrequency)));
    }

    #[test]
    fn zero_mode_reconstructs_and_reports_zero() {
        let p = DielectricProfile::fig1();
        let g = Grid1D::new(-2.0, 2.0, 0.1).unwrap();
        let m = reconstruct_mode(&vec![0.0; g.n_points], &g, &p, 3.0, 3.4).unwrap();
        assert!(m.w1.iter().chain(&m.w2_imag).chain(&m.w3).all(|&v| v == 0.0));
        let r = verify_mode(&m, &p);
        assert_eq!(r.jump_eps1w1, 0.0);
        assert_eq!(r.jump_w2, 0.0);
        assert_eq!(r.jump_w3, 0.0);
        assert_eq!(r.left_decay_rate, 0.0);
        assert_eq!(r.right_decay_tail, 0.0);
        assert_eq!(r.residual_l, 0.0);
        assert_eq!(r.divergence_residual, 0.0);
    }

    #[test]
    fn sign_flip_flips_components() {
        let p = DielectricProfile::fig1();
        let g = Grid1D::new(-2.0, 2.0, 0.1).unwrap();
        let w: Vec<f64> = g.points().iter().map(|x| (-x.abs()).exp()).collect();
        let a = reconstruct_mode(&w, &g, &p, 3.0, 3.4).unwrap();
        let neg: Vec<f64> = w.iter().map(|v| -v).collect();
        let b = reconstruct_mode(&neg, &g, &p, 3.0, 3.4).unwrap();
        let c = a.negated();
        assert_eq!(b.w1, c.w1);
        assert_eq!(b.w2_imag, c.w2_imag);
        assert_eq!(b.w3, c.w3);
    }

    #[test]
    fn verify_fig1_mode() {
        let p = DielectricProfile::fig1();
        let g = coarse();
        let mode = fundamental_mode(&p, 3.0, &g).unwrap().unwrap();
        let r = verify_mode(&mode, &p);
        let expected = (mode.k0 * mode.k0 - 9.0).sqrt();
        assert!((r.left_decay_rate - expected).abs() < 0.01 * expected, "{r:?}");
        assert!(r.right_decay_tail < 1e-6, "{r:?}");
        assert!(r.jump_w3 < 1e-3 && r.jump_w2 < 1e-3 && r.jump_eps1w1 < 1e-3, "{r:?}");
        let off = reconstruct_mode(&mode.w3, &g, &p, 3.0, 1.1 * mode.k0).unwrap();
        let r_off = verify_mode(&off, &p);
        assert!(r_off.residual_l >= 10.0 * r.residual_l, "{} vs {}", r_off.residual_l, r.residual_l);
        assert!(r.divergence_residual < 1e-8);
    }
}
