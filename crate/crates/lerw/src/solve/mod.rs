//! Linear-algebra backends: a sparse conjugate-gradient solver for the
//! floating-point path and fraction-free Gaussian elimination for the
//! exact-rational oracle path.

mod cg;
mod rational;

pub use cg::{cg_solve, Csr};
pub use rational::{det_rational, solve_integer_system};

/// Floating-point solver settings.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Relative residual target, `||r||_2 <= tol * ||b||_2`.
    pub tol: f64,
    /// Hard iteration cap; the solver reports stalling beyond it.
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 200_000,
        }
    }
}
