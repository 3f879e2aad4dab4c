//! Cholesky solves for kernel matrices with escalating diagonal jitter.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

const JITTER_START: f64 = 1e-12;
const JITTER_LIMIT: f64 = 1e-6;
const REFINEMENT_STEPS: usize = 20;

/// Factorization of a symmetric positive definite matrix, possibly of
/// `K + δI` when the plain factorization failed.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    jitter: f64,
}

impl SpdFactor {
    /// Tries `K`, then `K + δI` with `δ = 1e-12·trace/n` growing tenfold up
    /// to `1e-6·trace/n`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || n != matrix.ncols() {
            return Err(Error::InvalidInput(format!(
                "expected a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if let Some(chol) = Cholesky::new(matrix.clone()) {
            return Ok(Self {
                matrix,
                chol,
                jitter: 0.0,
            });
        }
        let scale = matrix.trace() / n as f64;
        let mut rel = JITTER_START;
        while rel <= JITTER_LIMIT * (1.0 + 1e-9) {
            let delta = rel * scale;
            let mut shifted = matrix.clone();
            for i in 0..n {
                shifted[(i, i)] += delta;
            }
            if let Some(chol) = Cholesky::new(shifted) {
                log::debug!("kernel matrix factorized with jitter {delta:.3e}");
                return Ok(Self {
                    matrix,
                    chol,
                    jitter: delta,
                });
            }
            rel *= 10.0;
        }
        Err(Error::IllConditioned {
            condition: eigen_condition(&matrix),
        })
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// Solves `K x = b` for every column of `rhs`, refining iteratively
    /// against the unshifted `K`.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = self.chol.solve(rhs);
        for c in 0..rhs.ncols() {
            let b = rhs.column(c).into_owned();
            let b_norm = b.amax();
            let mut col: DVector<f64> = x.column(c).into_owned();
            let mut last = f64::INFINITY;
            for _ in 0..REFINEMENT_STEPS {
                let r = &b - &self.matrix * &col;
                let r_norm = r.amax();
                if r_norm <= 1e-15 * b_norm || r_norm >= last {
                    break;
                }
                last = r_norm;
                col += self.chol.solve(&r);
            }
            x.set_column(c, &col);
        }
        x
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let m = DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
        self.solve(&m).column(0).into_owned()
    }
}

/// `λ_max / λ_min` from a symmetric eigendecomposition; `∞` when the
/// smallest eigenvalue is not positive.
pub fn eigen_condition(matrix: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(matrix.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
