//! Symmetric positive-definite linear solvers.
//!
//! Two interchangeable backends: Jacobi-preconditioned conjugate gradients
//! (the default) and an envelope Cholesky factorization under reverse
//! Cuthill-McKee ordering. A [`PreparedSolver`] binds a backend to one
//! matrix so repeated solves (time stepping) reuse the setup work.

mod cholesky;
mod pcg;

use alloc::vec::Vec;

pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use pcg::{conjugate_gradient, CgReport};

use crate::sparse::CsrMatrix;
use crate::Result;

/// Default relative residual tolerance of the iterative backend.
pub const DEFAULT_CG_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearSolver {
    ConjugateGradient { tolerance: f64, max_iterations: usize },
    Cholesky,
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver::ConjugateGradient {
            tolerance: DEFAULT_CG_TOLERANCE,
            max_iterations: 20_000,
        }
    }
}

/// A backend bound to one matrix.
#[derive(Clone, Debug)]
pub enum PreparedSolver {
    ConjugateGradient {
        matrix: CsrMatrix,
        inv_diagonal: Vec<f64>,
        tolerance: f64,
        max_iterations: usize,
    },
    Cholesky(EnvelopeCholesky),
}

impl PreparedSolver {
    pub fn new(matrix: CsrMatrix, kind: LinearSolver) -> Result<Self> {
        match kind {
            LinearSolver::ConjugateGradient { tolerance, max_iterations } => {
                let inv_diagonal = pcg::inverse_diagonal(&matrix)?;
                Ok(PreparedSolver::ConjugateGradient {
                    matrix,
                    inv_diagonal,
                    tolerance,
                    max_iterations,
                })
            }
            LinearSolver::Cholesky => Ok(PreparedSolver::Cholesky(EnvelopeCholesky::factor(&matrix)?)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PreparedSolver::ConjugateGradient { matrix, .. } => matrix.dim(),
            PreparedSolver::Cholesky(f) => f.dim(),
        }
    }

    /// Solves `A x = b`. `x` holds the initial guess for the iterative backend.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        match self {
            PreparedSolver::ConjugateGradient {
                matrix,
                inv_diagonal,
                tolerance,
                max_iterations,
            } => {
                pcg::solve_with_preconditioner(matrix, inv_diagonal, b, x, *tolerance, *max_iterations)?;
                Ok(())
            }
            PreparedSolver::Cholesky(f) => {
                f.solve_into(b, x);
                Ok(())
            }
        }
    }
}

/// One-shot solve of `A x = b` starting from `x`.
pub fn solve(matrix: &CsrMatrix, b: &[f64], x: &mut [f64], kind: LinearSolver) -> Result<()> {
    PreparedSolver::new(matrix.clone(), kind)?.solve(b, x)
}
