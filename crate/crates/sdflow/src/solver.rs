//! Direct sparse LU for the per-stage linear systems.
//!
//! The stage matrices are square, nonsymmetric (skew interface coupling plus
//! the divergence constraint block) and desk-scale, so a direct factorization
//! removes iterative-tolerance noise from the rate tables. A factorization is
//! immutable after construction and can serve any number of solves; the
//! stepping loop reuses it whenever the step pair (and hence the stage
//! matrix) repeats.

use crate::sparse::{norm_2, Csr};
use faer::prelude::SpSolver;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::SparseColMat;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: matrix is {0}, rhs has length {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is singular{}", match .pivot { Some(p) => format!(" (pivot/row {p})"), None => String::new() })]
    Singular { pivot: Option<usize> },
    #[error("factorization failed: {0}")]
    Backend(String),
}

/// One assembled implicit stage: system matrix (boundary rows already
/// replaced by identity) and right-hand side.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: Csr,
    pub rhs: Vec<f64>,
    pub n_free: usize,
}

/// Reusable sparse LU factorization. Keeps a copy of the matrix so solves can
/// run one step of iterative refinement and report true residuals.
pub struct Factorization {
    matrix: Csr,
    lu: Lu<usize, f64>,
}

pub fn factorize(matrix: &Csr) -> Result<Factorization, SolveError> {
    if matrix.n_rows != matrix.n_cols {
        return Err(SolveError::NotSquare(matrix.n_rows, matrix.n_cols));
    }
    let n = matrix.n_rows;
    let mut triplets = Vec::with_capacity(matrix.nnz());
    matrix.scaled_triplets_into(1.0, &mut triplets);
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| SolveError::Backend(format!("{e:?}")))?;
    let symbolic = SymbolicLu::try_new(mat.symbolic())
        .map_err(|e| SolveError::Backend(format!("{e:?}")))?;
    let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(|e| {
        let msg = format!("{e:?}");
        if msg.contains("Singular") {
            SolveError::Singular { pivot: None }
        } else {
            SolveError::Backend(msg)
        }
    })?;
    Ok(Factorization {
        matrix: matrix.clone(),
        lu,
    })
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.matrix.n_rows
    }

    /// Solve with one step of iterative refinement. Errors if the refined
    /// relative residual is still above 1e-10 (numerically singular system).
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(SolveError::DimensionMismatch(n, rhs.len()));
        }
        let mut x = self.solve_raw(rhs);
        // one refinement pass: x += A \ (b - A x)
        let mut r = rhs.to_vec();
        self.matrix.mul_vec_add(&x, -1.0, &mut r);
        let dx = self.solve_raw(&r);
        for i in 0..n {
            x[i] += dx[i];
        }
        r.copy_from_slice(rhs);
        self.matrix.mul_vec_add(&x, -1.0, &mut r);
        let bnorm = norm_2(rhs).max(1e-300);
        let rel = norm_2(&r) / bnorm;
        if !rel.is_finite() || rel > 1e-10 {
            let worst = r
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, _)| i);
            return Err(SolveError::Singular { pivot: worst });
        }
        Ok(x)
    }

    fn solve_raw(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let b = faer::mat::Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        let x = self.lu.solve(&b);
        (0..n).map(|i| x.read(i, 0)).collect()
    }

    /// Relative residual ‖Ax − b‖₂ / ‖b‖₂.
    pub fn residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let mut r = rhs.to_vec();
        self.matrix.mul_vec_add(x, -1.0, &mut r);
        norm_2(&r) / norm_2(rhs).max(1e-300)
    }
}
