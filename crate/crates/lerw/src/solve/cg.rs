//! Conjugate gradients with a symmetric Gauss-Seidel preconditioner.
//!
//! All systems solved in this crate have the form `I - Q` with `Q` a
//! symmetric matrix whose spectral radius is strictly below one (it is
//! dominated entrywise by a substochastic matrix), so they are symmetric
//! positive definite and CG converges.  The unit diagonal makes the
//! Gauss-Seidel sweeps particularly simple.

use super::SolverOptions;
use crate::error::{Error, Result};

/// Compressed sparse row matrix with unit diagonal stored implicitly:
/// the arrays hold only the off-diagonal entries.
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<u32>,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl Csr {
    /// `y = (I + offdiag) * x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let mut acc = x[i];
            let (lo, hi) = (self.indptr[i] as usize, self.indptr[i + 1] as usize);
            for k in lo..hi {
                acc += self.values[k] * x[self.indices[k] as usize];
            }
            y[i] = acc;
        }
    }

    /// Applies the symmetric Gauss-Seidel preconditioner
    /// `M = (I + L)(I + U)` (unit diagonal), writing `z = M^{-1} r`.
    fn sgs_apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.n;
        // forward solve (I + L) z = r
        for i in 0..n {
            let mut acc = r[i];
            let (lo, hi) = (self.indptr[i] as usize, self.indptr[i + 1] as usize);
            for k in lo..hi {
                let j = self.indices[k] as usize;
                if j < i {
                    acc -= self.values[k] * z[j];
                }
            }
            z[i] = acc;
        }
        // backward solve (I + U) z = z
        for i in (0..n).rev() {
            let mut acc = z[i];
            let (lo, hi) = (self.indptr[i] as usize, self.indptr[i + 1] as usize);
            for k in lo..hi {
                let j = self.indices[k] as usize;
                if j > i {
                    acc -= self.values[k] * z[j];
                }
            }
            z[i] = acc;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `(I + offdiag) x = b` by preconditioned conjugate gradients.
pub fn cg_solve(a: &Csr, b: &[f64], opts: SolverOptions) -> Result<Vec<f64>> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let norm_b = dot(b, b).sqrt();
    if norm_b == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = opts.tol * norm_b;

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    a.sgs_apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];

    for iter in 0..opts.max_iter {
        a.matvec(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            // cannot happen for an SPD system unless rounding has destroyed
            // the search direction; report rather than loop
            return Err(Error::Singular);
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= target {
            return Ok(x);
        }
        if iter + 1 == opts.max_iter {
            return Err(Error::SolverStalled {
                tol: opts.tol,
                residual: rnorm / norm_b,
                iterations: iter + 1,
            });
        }
        a.sgs_apply(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    unreachable!()
}
