use crate::sparse::{CsrMatrix, Factored};

use super::FemError;

/// One linear equality `Σ c_k x_k = value`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub value: f64,
}

/// A square system `K x = f` with optional constraint rows appended below it.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Set only when `matrix` is known to be symmetric; checked by [`SparseSystem::validate`].
    pub symmetric: bool,
}

impl SparseSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Self {
        Self { matrix, rhs, constraints: Vec::new(), symmetric: false }
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn validate(&self) -> Result<(), FemError> {
        let (r, c) = (self.matrix.nrows(), self.matrix.ncols());
        if r != c || self.rhs.len() != r {
            return Err(FemError::Shape(format!("{r}x{c} matrix with {} right-hand-side entries", self.rhs.len())));
        }
        if let Some(bad) = self.constraints.iter().flat_map(|k| &k.coeffs).find(|(j, _)| *j >= c) {
            return Err(FemError::Shape(format!("constraint column {} out of range", bad.0)));
        }
        if self.symmetric {
            let tol = 1e-12 * self.matrix.frobenius_norm().max(f64::MIN_POSITIVE);
            if !self.matrix.is_symmetric(tol) {
                return Err(FemError::Shape("matrix flagged symmetric is not".into()));
            }
        }
        Ok(())
    }

    /// The stacked matrix `[K; C]` and right-hand side `[f; g]`.
    pub fn augmented(&self) -> (CsrMatrix, Vec<f64>) {
        let n = self.matrix.nrows();
        let mut trip = self.matrix.triplets();
        let mut rhs = self.rhs.clone();
        for (i, c) in self.constraints.iter().enumerate() {
            trip.extend(c.coeffs.iter().map(|&(j, v)| (n + i, j, v)));
            rhs.push(c.value);
        }
        (CsrMatrix::from_triplets(n + self.constraints.len(), self.matrix.ncols(), &trip), rhs)
    }
}

/// Least-squares solution of the augmented system (exact when it is square and regular).
///
/// Rank deficiency beyond what the constraints remove shows up as a
/// [`crate::sparse::LinearSolveError::Singular`] error.
pub fn solve_constrained(system: &SparseSystem) -> Result<Vec<f64>, FemError> {
    system.validate()?;
    let (a, b) = system.augmented();
    Ok(Factored::new(&a)?.solve(&b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::{assemble_scalar_load, assemble_stiffness};
    use crate::fem::mesh::Rect;
    use crate::fem::SideMesh;
    use crate::profile::Side;
    use crate::sparse::LinearSolveError;

    #[test]
    fn identity_returns_rhs() {
        let s = SparseSystem::new(CsrMatrix::identity(4), vec![1.0, -2.0, 3.0, 0.5]);
        assert_eq!(solve_constrained(&s).unwrap(), vec![1.0, -2.0, 3.0, 0.5]);
    }

    #[test]
    fn neumann_poisson_with_zero_mean() {
        let m = SideMesh::new(Side::Plus, Rect::new((0.0, 1.0), (0.0, 1.0)), 0.125).unwrap();
        let k = assemble_stiffness(&m, |_| 1.0);
        // compatible data: ∫ f = 0
        let f = assemble_scalar_load(&m, |x| (std::f64::consts::PI * x[0]).cos());
        let mass = m.node_integrals();
        let c = Constraint { coeffs: mass.iter().copied().enumerate().collect(), value: 0.0 };
        let mut s = SparseSystem::new(k, f).with_constraint(c);
        s.symmetric = true;
        let u = solve_constrained(&s).unwrap();
        let mean: f64 = u.iter().zip(&mass).map(|(a, b)| a * b).sum();
        assert!(mean.abs() < 1e-10);
        let r: Vec<f64> = s.matrix.mul_vec(&u).iter().zip(&s.rhs).map(|(a, b)| a - b).collect();
        assert!(crate::sparse::norm2(&r) < 1e-10);
    }

    #[test]
    fn singular_without_constraint_is_reported() {
        let m = SideMesh::new(Side::Plus, Rect::new((0.0, 1.0), (0.0, 1.0)), 0.25).unwrap();
        let k = assemble_stiffness(&m, |_| 1.0);
        let f = vec![1.0; m.n_nodes()];
        let err = solve_constrained(&SparseSystem::new(k, f)).unwrap_err();
        assert!(
            matches!(err, FemError::Linear(LinearSolveError::Singular { .. }) | FemError::Linear(LinearSolveError::Factorization(_))),
            "{err:?}"
        );
    }

    #[test]
    fn shape_and_symmetry_checks() {
        let s = SparseSystem::new(CsrMatrix::identity(3), vec![1.0; 2]);
        assert!(matches!(solve_constrained(&s), Err(FemError::Shape(_))));
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 1.0)]);
        let mut s = SparseSystem::new(a, vec![1.0, 1.0]);
        s.symmetric = true;
        assert!(matches!(s.validate(), Err(FemError::Shape(_))));
    }
}
