use faer::linalg::solvers::Solve;
use faer::Mat;
use log::debug;

use crate::grid::Grid1D;
use crate::profile::DielectricProfile;
use crate::sparse::{dot, norm2, Factored};

use super::assemble::InterfaceEigenproblem;
use super::ModeError;

/// Ratios below this count as fully localized and compare equal, so that
/// among such modes the one with the largest `k²` (the fundamental) comes first.
const RATIO_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Dense for small grids, shift-invert Arnoldi otherwise.
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone)]
pub struct DispersionOptions {
    /// Defaults to [`default_shift`].
    pub shift: Option<f64>,
    pub krylov_dim: usize,
    /// Ritz values refined per solve (nearest to the shift first).
    pub refine_count: usize,
    pub decay_tol: f64,
    /// Fraction of the grid on each end used for the boundary ratio.
    pub boundary_window: f64,
    pub dense_limit: usize,
    pub method: EigenMethod,
}

impl Default for DispersionOptions {
    fn default() -> Self {
        Self {
            shift: None,
            krylov_dim: 40,
            refine_count: 6,
            decay_tol: 1e-6,
            boundary_window: 0.05,
            dense_limit: 2000,
            method: EigenMethod::Auto,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModeCandidate {
    pub k0: f64,
    pub k_squared: f64,
    /// Full `w₃` on the grid with `w₃(0) > 0` and `max|w₃| = 1`.
    pub w3: Vec<f64>,
    pub boundary_ratio: f64,
    /// `‖A v − k² B v‖₂` for the unit-norm eigenvector `v`.
    pub eigen_residual: f64,
}

/// Largest `|w₃|` over the outer windows divided by the global maximum.
pub fn boundary_ratio(w3: &[f64], window: f64) -> f64 {
    let n = w3.len();
    let max = w3.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let k = ((window * n as f64).ceil() as usize).clamp(1, n);
    let edge = w3[..k].iter().chain(&w3[n - k..]).fold(0.0f64, |m, v| m.max(v.abs()));
    edge / max
}

/// Localized TM modes at `omega0`, best localized first.
pub fn solve_dispersion(
    profile: &DielectricProfile,
    omega0: f64,
    grid: &Grid1D,
    n_candidates: usize,
) -> Result<Vec<ModeCandidate>, ModeError> {
    solve_dispersion_with(profile, omega0, grid, n_candidates, &DispersionOptions::default())
}

pub fn solve_dispersion_with(
    profile: &DielectricProfile,
    omega0: f64,
    grid: &Grid1D,
    n_candidates: usize,
    opts: &DispersionOptions,
) -> Result<Vec<ModeCandidate>, ModeError> {
    if omega0 == 0.0 || !omega0.is_finite() {
        return Err(ModeError::ZeroFrequency);
    }
    let ep = InterfaceEigenproblem::assemble(profile, omega0, grid)?;
    let dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::ShiftInvert => false,
        EigenMethod::Auto => grid.n_points <= opts.dense_limit,
    };
    let pairs = if dense {
        dense_pairs(&ep, opts)?
    } else {
        let sigma = opts.shift.unwrap_or_else(|| default_shift(profile, omega0, grid));
        arnoldi_pairs(&ep, sigma, opts)?
    };

    let mut out: Vec<ModeCandidate> = Vec::new();
    for (lambda, v) in pairs {
        if !(lambda > 0.0) {
            continue;
        }
        if out.iter().any(|c| (c.k_squared - lambda).abs() <= 1e-9 * lambda) {
            continue;
        }
        let mut w3 = ep.full_w3(&v);
        let max = w3.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max == 0.0 {
            continue;
        }
        let i0 = grid.interface_index();
        let s = if w3[i0] < 0.0 { -1.0 } else { 1.0 };
        w3.iter_mut().for_each(|x| *x *= s / max);
        let ratio = boundary_ratio(&w3, opts.boundary_window);
        let nv = norm2(&v);
        let unit: Vec<f64> = v.iter().map(|x| x / nv).collect();
        let res = ep.residual(lambda, &unit);
        debug!("k^2 = {lambda:.12} ratio = {ratio:.3e} residual = {res:.3e}");
        if ratio <= opts.decay_tol {
            out.push(ModeCandidate {
                k0: lambda.sqrt(),
                k_squared: lambda,
                w3,
                boundary_ratio: ratio,
                eigen_residual: res,
            });
        }
    }
    out.sort_by(|a, b| {
        a.boundary_ratio
            .max(RATIO_FLOOR)
            .total_cmp(&b.boundary_ratio.max(RATIO_FLOOR))
            .then(b.k_squared.total_cmp(&a.k_squared))
    });
    out.truncate(n_candidates);
    Ok(out)
}

/// `1.2 ω₀² max(ε₁(left), ε₁(right))`: just above the continuum edge of both half-lines.
pub fn default_shift(profile: &DielectricProfile, omega0: f64, grid: &Grid1D) -> f64 {
    1.2 * omega0 * omega0 * profile.eps1(grid.left).max(profile.eps1(grid.right))
}

fn start_vector(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (0.7 * i as f64).sin()).collect();
    let s = norm2(&v);
    v.into_iter().map(|x| x / s).collect()
}

/// Rayleigh-type inverse iteration on the pencil starting from `(lambda, x)`.
///
/// Runs until the residual stops improving; keeps the best pair seen.
fn refine(ep: &InterfaceEigenproblem, mut lambda: f64, mut x: Vec<f64>) -> Result<(f64, Vec<f64>), ModeError> {
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut best = (ep.residual(lambda, &x), lambda, x.clone());
    let mut stalls = 0;
    for _ in 0..10 {
        let Ok(f) = Factored::new(&ep.shifted(lambda)) else { break };
        let Ok(y) = f.solve_unchecked(&ep.b.mul_vec(&x)) else { break };
        let yy = dot(&y, &y);
        if !(yy.is_finite() && yy > 0.0) {
            break;
        }
        lambda += dot(&x, &y) / yy;
        let ny = yy.sqrt();
        x = y.into_iter().map(|v| v / ny).collect();
        let r = ep.residual(lambda, &x);
        if r < 0.5 * best.0 {
            stalls = 0;
        } else {
            stalls += 1;
        }
        if r < best.0 {
            best = (r, lambda, x.clone());
        }
        if stalls >= 2 {
            break;
        }
    }
    Ok((best.1, best.2))
}

fn arnoldi_pairs(ep: &InterfaceEigenproblem, sigma: f64, opts: &DispersionOptions) -> Result<Vec<(f64, Vec<f64>)>, ModeError> {
    let n = ep.dim();
    let m = opts.krylov_dim.min(n).max(2);
    let op = Factored::new(&ep.shifted(sigma))?;
    let mut basis: Vec<Vec<f64>> = vec![start_vector(n)];
    let mut hess = Mat::<f64>::zeros(m + 1, m);
    let mut dim = m;
    for j in 0..m {
        let mut w = op.solve_unchecked(&ep.b.mul_vec(&basis[j]))?;
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = dot(q, &w);
                hess[(i, j)] += c;
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let nw = norm2(&w);
        hess[(j + 1, j)] = nw;
        if nw <= 1e-14 * hess[(j, j)].abs().max(1.0) {
            dim = j + 1;
            break;
        }
        basis.push(w.into_iter().map(|x| x / nw).collect());
    }
    let h = Mat::from_fn(dim, dim, |i, j| hess[(i, j)]);
    let eig = h.eigen().map_err(|e| ModeError::Eigen(format!("{e:?}")))?;
    let mut ritz: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    let u = eig.U();
    for k in 0..dim {
        let mu = eig.S().column_vector()[k];
        if mu.norm() == 0.0 || mu.im.abs() > 1e-8 * mu.norm() {
            continue;
        }
        // real Ritz vector: fix the phase of the small eigenvector at its largest entry
        let piv = (0..dim)
            .max_by(|&a, &b| u[(a, k)].norm().total_cmp(&u[(b, k)].norm()))
            .unwrap_or(0);
        let ph = u[(piv, k)];
        let mut x = vec![0.0; n];
        for (i, q) in basis.iter().take(dim).enumerate() {
            let c = (u[(i, k)] / ph).re;
            x.iter_mut().zip(q).for_each(|(a, b)| *a += c * b);
        }
        ritz.push((mu.norm(), sigma + 1.0 / mu.re, x));
    }
    ritz.sort_by(|a, b| b.0.total_cmp(&a.0));
    ritz.truncate(opts.refine_count.max(1));
    ritz.into_iter().map(|(_, l, x)| refine(ep, l, x)).collect()
}

fn dense_pairs(ep: &InterfaceEigenproblem, opts: &DispersionOptions) -> Result<Vec<(f64, Vec<f64>)>, ModeError> {
    // B = −(I + s dᵀ) is always invertible, so reduce to the standard problem B⁻¹A
    let a = ep.a.to_faer_dense();
    let b = ep.b.to_faer_dense();
    let n = ep.dim();
    let c = b.partial_piv_lu().solve(&a);
    let eig = c.eigen().map_err(|e| ModeError::Eigen(format!("{e:?}")))?;
    let (vals, u) = (eig.S(), eig.U());
    let mut out = Vec::new();
    for k in 0..n {
        let l = vals.column_vector()[k];
        if !(l.re.is_finite() && l.im.abs() <= 1e-8 * l.norm().max(1e-300)) || l.re <= 0.0 {
            continue;
        }
        let piv = (0..n)
            .max_by(|&i, &j| u[(i, k)].norm().total_cmp(&u[(j, k)].norm()))
            .unwrap_or(0);
        let ph = u[(piv, k)];
        let x: Vec<f64> = (0..n).map(|i| (u[(i, k)] / ph).re).collect();
        // refine only what could pass the decay screen
        let w3 = ep.full_w3(&x);
        if boundary_ratio(&w3, opts.boundary_window) > 1e3 * opts.decay_tol {
            continue;
        }
        out.push(refine(ep, l.re, x)?);
    }
    Ok(out)
}
