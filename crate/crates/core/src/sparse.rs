//! Compressed sparse row matrices and a factorization wrapper over `faer`.

use std::io::{self, Write};

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LinearSolveError {
    #[error("shape mismatch: matrix is {nrows}x{ncols}, right-hand side has {rhs} entries")]
    Shape { nrows: usize, ncols: usize, rhs: usize },
    #[error("underdetermined system ({nrows} rows < {ncols} columns)")]
    Underdetermined { nrows: usize, ncols: usize },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error(
        "matrix is numerically singular beyond its expected kernel \
         (|x| |A| / |b| = {amplification:.3e}, residual {residual:.3e})"
    )]
    Singular { amplification: f64, residual: f64 },
}

/// Amplification `|x| |A|_F / |b|` above which a solve is reported singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e13;

impl CsrMatrix {
    /// Duplicate entries are summed; explicit zeros are kept.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut next = counts.clone();
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row.clear();
            row.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            // stable sort keeps the summation order of duplicates deterministic
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in &row {
                match indices.last() {
                    Some(&last) if last == c && indices.len() > indptr[r] => {
                        *values.last_mut().unwrap() += v;
                    }
                    _ => {
                        indices.push(c);
                        values.push(v);
                    }
                }
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for (i, &yi) in y.iter().enumerate() {
            for (j, v) in self.row(i) {
                out[j] += v * yi;
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= factor);
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] += v;
        }
        d
    }

    pub fn to_faer_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>, LinearSolveError> {
        let t: Vec<_> = self.triplets().into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| LinearSolveError::Factorization(format!("{e:?}")))
    }

    /// Writes one `row col value` line per stored entry.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }
}

enum Kind {
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>),
    Qr(faer::sparse::linalg::solvers::Qr<usize, f64>),
}

/// A factored sparse matrix: LU when square, QR least squares when tall.
pub struct Factored {
    kind: Kind,
    nrows: usize,
    ncols: usize,
    norm: f64,
    matrix: CsrMatrix,
}

impl std::fmt::Debug for Factored {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = match self.kind {
            Kind::Lu(_) => "lu",
            Kind::Qr(_) => "qr",
        };
        write!(f, "Factored({k}, {}x{})", self.nrows, self.ncols)
    }
}

impl Factored {
    pub fn new(a: &CsrMatrix) -> Result<Self, LinearSolveError> {
        let (nrows, ncols) = (a.nrows(), a.ncols());
        if nrows < ncols {
            return Err(LinearSolveError::Underdetermined { nrows, ncols });
        }
        let m = a.to_faer()?;
        let kind = if nrows == ncols {
            Kind::Lu(m.sp_lu().map_err(|e| LinearSolveError::Factorization(format!("{e:?}")))?)
        } else {
            Kind::Qr(m.sp_qr().map_err(|e| LinearSolveError::Factorization(format!("{e:?}")))?)
        };
        Ok(Self { kind, nrows, ncols, norm: a.frobenius_norm(), matrix: a.clone() })
    }

    pub fn is_least_squares(&self) -> bool {
        matches!(self.kind, Kind::Qr(_))
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solves without the singularity screen.
    pub fn solve_unchecked(&self, b: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
        if b.len() != self.nrows {
            return Err(LinearSolveError::Shape { nrows: self.nrows, ncols: self.ncols, rhs: b.len() });
        }
        let mut rhs = Mat::from_fn(self.nrows, 1, |i, _| b[i]);
        match &self.kind {
            Kind::Lu(lu) => lu.solve_in_place(rhs.as_mut()),
            Kind::Qr(qr) => qr.solve_lstsq_in_place(rhs.as_mut()),
        }
        Ok((0..self.ncols).map(|i| rhs[(i, 0)]).collect())
    }

    /// Solves `A x = b` (or the least-squares problem) and screens the result.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
        let x = self.solve_unchecked(b)?;
        let bn = norm2(b);
        let xn = norm2(&x);
        let finite = x.iter().all(|v| v.is_finite());
        if bn == 0.0 && finite {
            return Ok(x);
        }
        let amplification = xn * self.norm / bn;
        if !finite || amplification > SINGULARITY_THRESHOLD {
            let r = self.matrix.mul_vec(&x);
            let residual = norm2(&r.iter().zip(b).map(|(a, b)| a - b).collect::<Vec<_>>());
            return Err(LinearSolveError::Singular { amplification, residual });
        }
        Ok(x)
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
