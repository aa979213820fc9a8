use serde::Serialize;

use crate::grid::Grid1D;
use crate::profile::{DielectricProfile, Side};

use super::ModeError;

/// A TM interface mode `(w₁, i·w̃₂, w₃)` sampled on a grid.
///
/// Node values at `x1 = 0` are the plus-side limits; the minus-side limits of
/// the components that jump are kept separately.
#[derive(Debug, Clone)]
pub struct InterfaceMode {
    pub omega0: f64,
    pub k0: f64,
    pub nu: f64,
    pub grid: Grid1D,
    pub w1: Vec<f64>,
    pub w2_imag: Vec<f64>,
    pub w3: Vec<f64>,
    /// `ε₁` at the nodes (plus side at the interface node).
    pub eps1: Vec<f64>,
    pub eps1_left: f64,
    pub w1_left: f64,
    pub w2_imag_left: f64,
}

/// Derivative samples: central inside, second-order one-sided at the ends and
/// from the right at the interface node. Also returns the left limit at 0⁻.
pub(crate) fn split_derivative(w: &[f64], h: f64, i0: usize) -> (Vec<f64>, f64) {
    let n = w.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return (d, 0.0);
    }
    for i in 1..n - 1 {
        d[i] = (w[i + 1] - w[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    d[n - 1] = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);
    let mut left = d[i0];
    if i0 + 2 < n {
        d[i0] = (-3.0 * w[i0] + 4.0 * w[i0 + 1] - w[i0 + 2]) / (2.0 * h);
    }
    if i0 >= 2 {
        left = (3.0 * w[i0] - 4.0 * w[i0 - 1] + w[i0 - 2]) / (2.0 * h);
    }
    (d, left)
}

/// Builds `w₁ = −k₀ w₃ / (ω₀ ε₁)` and `w̃₂ = −w₃' / (ω₀ ε₁)` from `w₃`.
///
/// The result is rescaled so that `max|w₃| = 1` (positive factor only).
pub fn reconstruct_mode(
    w3: &[f64],
    grid: &Grid1D,
    profile: &DielectricProfile,
    omega0: f64,
    k0: f64,
) -> Result<InterfaceMode, ModeError> {
    if omega0 == 0.0 || !omega0.is_finite() {
        return Err(ModeError::ZeroFrequency);
    }
    if w3.len() != grid.n_points {
        return Err(ModeError::SampleCount { expected: grid.n_points, got: w3.len() });
    }
    let max = w3.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if max > 0.0 { 1.0 / max } else { 1.0 };
    let w3: Vec<f64> = w3.iter().map(|v| v * scale).collect();
    let h = grid.spacing;
    let i0 = grid.interface_index();
    let eps1: Vec<f64> = (0..grid.n_points).map(|i| profile.eps1(grid.x(i))).collect();
    let eps1_left = profile.eps1_on(Side::Minus).value(0.0);
    let (dw3, dw3_left) = split_derivative(&w3, h, i0);
    let w1: Vec<f64> = w3.iter().zip(&eps1).map(|(w, e)| -k0 * w / (omega0 * e)).collect();
    let w2_imag: Vec<f64> = dw3.iter().zip(&eps1).map(|(d, e)| -d / (omega0 * e)).collect();
    Ok(InterfaceMode {
        omega0,
        k0,
        nu: profile.nu(),
        grid: grid.clone(),
        w1_left: -k0 * w3[i0] / (omega0 * eps1_left),
        w2_imag_left: -dw3_left / (omega0 * eps1_left),
        w1,
        w2_imag,
        w3,
        eps1,
        eps1_left,
    })
}

impl InterfaceMode {
    pub fn eps1_w1(&self) -> Vec<f64> {
        self.eps1.iter().zip(&self.w1).map(|(e, w)| e * w).collect()
    }

    /// Flips the sign of every component.
    pub fn negated(&self) -> Self {
        let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        Self {
            w1: neg(&self.w1),
            w2_imag: neg(&self.w2_imag),
            w3: neg(&self.w3),
            w1_left: -self.w1_left,
            w2_imag_left: -self.w2_imag_left,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeReport {
    /// Jumps at `x1 = 0` relative to the maximum of each quantity.
    pub jump_eps1w1: f64,
    pub jump_w2: f64,
    pub jump_w3: f64,
    pub left_decay_rate: f64,
    pub right_decay_tail: f64,
    /// Discrete L² norm of `L(k, ω) w`.
    pub residual_l: f64,
    /// Discrete L² norm of `(ε₁w₁)' − ε₁ k w̃₂`.
    pub divergence_residual: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `|f(0⁺) − f(0⁻)| / max|f|` with `f(0⁻)` linearly extrapolated from `-h, -2h`.
fn relative_jump(f: &[f64], i0: usize, right: f64) -> f64 {
    let m = max_abs(f);
    if m == 0.0 || i0 < 2 {
        return 0.0;
    }
    let left = 2.0 * f[i0 - 1] - f[i0 - 2];
    (right - left).abs() / m
}

/// Least-squares slope of `ln|w₃|` on the minus side where `|w₃|/max` lies in `[lo, hi]`.
fn left_decay_rate(mode: &InterfaceMode, lo: f64, hi: f64) -> f64 {
    let m = max_abs(&mode.w3);
    if m == 0.0 {
        return 0.0;
    }
    let i0 = mode.grid.interface_index();
    let pts: Vec<(f64, f64)> = (0..i0)
        .filter(|&i| {
            let r = mode.w3[i].abs() / m;
            r >= lo && r <= hi
        })
        .map(|i| (mode.grid.x(i), (mode.w3[i].abs() / m).ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn verify_mode(mode: &InterfaceMode, profile: &DielectricProfile) -> ModeReport {
    let g = &mode.grid;
    let (h, i0, n) = (g.spacing, g.interface_index(), g.n_points);
    let (k, om) = (mode.k0, mode.omega0);
    let ew1 = mode.eps1_w1();
    let jump_eps1w1 = relative_jump(&ew1, i0, ew1[i0]);
    let jump_w2 = relative_jump(&mode.w2_imag, i0, mode.w2_imag[i0]);
    let jump_w3 = relative_jump(&mode.w3, i0, mode.w3[i0]);

    let m3 = max_abs(&mode.w3);
    let win = ((0.05 * n as f64).ceil() as usize).clamp(1, n);
    let right_decay_tail = if m3 > 0.0 { max_abs(&mode.w3[n - win..]) / m3 } else { 0.0 };

    let (dw2, _) = split_derivative(&mode.w2_imag, h, i0);
    let (dew1, _) = split_derivative(&ew1, h, i0);
    let (dw3, _) = split_derivative(&mode.w3, h, i0);
    let mut r_l = 0.0;
    let mut r_div = 0.0;
    for i in 0..n {
        let e = profile.eps1(g.x(i));
        let r1 = e * om * mode.w1[i] + k * mode.w3[i];
        // second row divided by i
        let r2 = e * om * mode.w2_imag[i] + dw3[i];
        let r3 = k * mode.w1[i] - dw2[i] + om * mode.w3[i];
        r_l += r1 * r1 + r2 * r2 + r3 * r3;
        let rd = dew1[i] - e * k * mode.w2_imag[i];
        r_div += rd * rd;
    }
    ModeReport {
        jump_eps1w1,
        jump_w2,
        jump_w3,
        left_decay_rate: left_decay_rate(mode, 1e-7, 1e-2),
        right_decay_tail,
        residual_l: (h * r_l).sqrt(),
        divergence_residual: (h * r_div).sqrt(),
    }
}
