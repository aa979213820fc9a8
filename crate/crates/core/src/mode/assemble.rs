use crate::grid::Grid1D;
use crate::profile::{DielectricProfile, Side};
use crate::sparse::CsrMatrix;

use super::ModeError;

/// Discrete pair `(A, B)` with `A v = k² B v` over the regular part `w₃ᵣ`.
///
/// Unknowns are `w₃ᵣ` at the interior nodes `1..n-1`. The singular part is
/// `s(x) d(v)` where `d(v)` approximates `w₃ᵣ'(0)`.
#[derive(Debug, Clone)]
pub struct InterfaceEigenproblem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub grid: Grid1D,
    pub omega0: f64,
    pub nu: f64,
    kernel: Vec<f64>,
    d_coeffs: Vec<(usize, f64)>,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The kernel `s` of the rank-one correction.
pub fn kernel(nu: f64, x1: f64) -> f64 {
    if x1 < 0.0 {
        -sign(nu)
    } else {
        -sign(nu) * (-nu.abs() * x1).exp()
    }
}

struct Coeffs {
    eps: f64,
    q: f64,
    t_kernel: f64,
}

fn side_coeffs(profile: &DielectricProfile, side: Side, x: f64, nu: f64, omega0: f64) -> Coeffs {
    let (eps, deps) = profile.eps1_on(side).eval(x);
    let q = deps / eps;
    let w2 = omega0 * omega0;
    let sg = sign(nu);
    let t_kernel = match side {
        Side::Minus => eps * w2 * sg,
        Side::Plus => {
            let e = (-nu.abs() * x).exp();
            let s = -sg * e;
            let s1 = nu * e;
            let s2 = -nu.abs() * nu * e;
            -s2 + q * s1 - eps * w2 * s
        }
    };
    Coeffs { eps, q, t_kernel }
}

impl InterfaceEigenproblem {
    pub fn assemble(profile: &DielectricProfile, omega0: f64, grid: &Grid1D) -> Result<Self, ModeError> {
        let n = grid.n_points;
        let i0 = grid.interface_index();
        if i0 < 1 || i0 + 1 > n - 2 {
            return Err(ModeError::GridTooSmall(n));
        }
        profile.validate_on(grid.points())?;
        let h = grid.spacing;
        let m = n - 2;
        let nu = profile.nu();
        let sg = sign(nu);

        // d(v): (-3 v(0) + 4 v(h) - v(2h)) / 2h, boundary node value is zero
        let d_coeffs: Vec<(usize, f64)> = [(i0, -3.0), (i0 + 1, 4.0), (i0 + 2, -1.0)]
            .into_iter()
            .filter(|&(i, _)| i <= n - 2)
            .map(|(i, c)| (i - 1, c / (2.0 * h)))
            .collect();

        let mut t_trip = Vec::with_capacity(3 * m + 6 * m);
        let mut u = vec![0.0; m];
        let mut kern = vec![0.0; m];
        for i in 1..=n - 2 {
            let r = i - 1;
            let x = grid.x(i);
            let c = if i == i0 {
                let a = side_coeffs(profile, Side::Minus, 0.0, nu, omega0);
                let b = side_coeffs(profile, Side::Plus, 0.0, nu, omega0);
                Coeffs {
                    eps: 0.5 * (a.eps + b.eps),
                    q: 0.5 * (a.q + b.q),
                    t_kernel: 0.5 * (a.t_kernel + b.t_kernel),
                }
            } else {
                side_coeffs(profile, Side::of(x), x, nu, omega0)
            };
            let lo = -1.0 / (h * h) - c.q / (2.0 * h);
            let up = -1.0 / (h * h) + c.q / (2.0 * h);
            let diag = 2.0 / (h * h) - c.eps * omega0 * omega0;
            if i > 1 {
                t_trip.push((r, r - 1, lo));
            } else {
                // w₃ᵣ(left) = sign(ν) d(v)
                u[r] += lo * sg;
            }
            t_trip.push((r, r, diag));
            if i < n - 2 {
                t_trip.push((r, r + 1, up));
            }
            u[r] += c.t_kernel;
            kern[r] = kernel(nu, x);
        }

        let mut a_trip = t_trip;
        let mut b_trip = Vec::with_capacity(m + 3 * m);
        for r in 0..m {
            b_trip.push((r, r, -1.0));
            for &(col, dc) in &d_coeffs {
                if u[r] != 0.0 {
                    a_trip.push((r, col, u[r] * dc));
                }
                if kern[r] != 0.0 {
                    b_trip.push((r, col, -kern[r] * dc));
                }
            }
        }
        Ok(Self {
            a: CsrMatrix::from_triplets(m, m, &a_trip),
            b: CsrMatrix::from_triplets(m, m, &b_trip),
            grid: grid.clone(),
            omega0,
            nu,
            kernel: kern,
            d_coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// The discrete `w₃ᵣ'(0)`.
    pub fn d(&self, v: &[f64]) -> f64 {
        self.d_coeffs.iter().map(|&(j, c)| c * v[j]).sum()
    }

    /// `w₃ = w₃ᵣ + s d` on every grid node, boundary nodes included.
    pub fn full_w3(&self, v: &[f64]) -> Vec<f64> {
        let n = self.grid.n_points;
        let d = self.d(v);
        let mut w = vec![0.0; n];
        w[0] = sign(self.nu) * d + kernel(self.nu, self.grid.x(0)) * d;
        for i in 1..=n - 2 {
            w[i] = v[i - 1] + self.kernel[i - 1] * d;
        }
        w[n - 1] = kernel(self.nu, self.grid.x(n - 1)) * d;
        w
    }

    /// `‖A v − λ B v‖₂`.
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let av = self.a.mul_vec(v);
        let bv = self.b.mul_vec(v);
        av.iter().zip(&bv).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
    }

    /// `A − σ B`, sparse.
    pub fn shifted(&self, sigma: f64) -> CsrMatrix {
        let mut t = self.a.triplets();
        t.extend(self.b.triplets().into_iter().map(|(i, j, v)| (i, j, -sigma * v)));
        CsrMatrix::from_triplets(self.dim(), self.dim(), &t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_unit_profile_gives_second_difference() {
        let grid = Grid1D::new(-2.0, 2.0, 1.0).unwrap();
        let p = DielectricProfile::piecewise_constant(1.0, 1.0, 1.0);
        let ep = InterfaceEigenproblem::assemble(&p, 0.0, &grid).unwrap();
        assert_eq!(ep.nu, 0.0);
        let a = ep.a.to_dense();
        assert_eq!(a[1], vec![-1.0, 2.0, -1.0]);
        assert_eq!(a[0], vec![2.0, -1.0, 0.0]);
        let b = ep.b.to_dense();
        assert_eq!(b[1], vec![0.0, -1.0, 0.0]);
    }

    #[test]
    fn fig1_kernel_and_jump() {
        let grid = Grid1D::new(-1.0, 1.0, 0.1).unwrap();
        let ep = InterfaceEigenproblem::assemble(&DielectricProfile::fig1(), 3.0, &grid).unwrap();
        assert_eq!(ep.nu, 1.0);
        assert_eq!(kernel(1.0, -0.5), -1.0);
        assert!((kernel(1.0, 0.5) + (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(kernel(0.0, 0.5), 0.0);
    }

    #[test]
    fn full_w3_vanishes_at_left_boundary() {
        let grid = Grid1D::new(-1.0, 1.0, 0.1).unwrap();
        let ep = InterfaceEigenproblem::assemble(&DielectricProfile::fig1(), 3.0, &grid).unwrap();
        let v: Vec<f64> = (0..ep.dim()).map(|i| (i as f64 * 0.3).sin()).collect();
        let w = ep.full_w3(&v);
        assert_eq!(w.len(), grid.n_points);
        assert!(w[0].abs() < 1e-14);
    }

    #[test]
    fn misaligned_grid_is_rejected_before_assembly() {
        assert!(Grid1D::new(-1.0, 1.05, 0.1).is_err());
    }
}
