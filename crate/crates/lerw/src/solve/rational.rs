//! Exact linear algebra over the rationals, used by the oracle paths.
//!
//! Systems are scaled to integer matrices and eliminated with the
//! fraction-free (Bareiss) scheme, which keeps every intermediate entry an
//! exact minor determinant and so avoids rational blow-up during the
//! forward sweep.  Back substitution is done in `BigRational`.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Solves `A X = B` exactly for an integer matrix `A` (n x n) and integer
/// right-hand sides `B` (n x m, column major).  Returns the solution
/// columns as rationals.
pub fn solve_integer_system(
    a: Vec<Vec<BigInt>>,
    rhs_cols: Vec<Vec<BigInt>>,
) -> Result<Vec<Vec<BigRational>>> {
    let n = a.len();
    let m = rhs_cols.len();
    for row in &a {
        assert_eq!(row.len(), n, "matrix must be square");
    }
    for col in &rhs_cols {
        assert_eq!(col.len(), n, "rhs length mismatch");
    }

    // augmented matrix [A | B]
    let width = n + m;
    let mut mat: Vec<Vec<BigInt>> = a;
    for (i, row) in mat.iter_mut().enumerate() {
        for col in &rhs_cols {
            row.push(col[i].clone());
        }
    }

    let mut prev = BigInt::from(1);
    for k in 0..n {
        // partial pivoting on magnitude keeps intermediate entries small
        let pivot_row = (k..n)
            .filter(|&r| !mat[r][k].is_zero())
            .max_by_key(|&r| mat[r][k].abs());
        let pivot_row = match pivot_row {
            Some(r) => r,
            None => return Err(Error::Singular),
        };
        mat.swap(k, pivot_row);
        let pivot = mat[k][k].clone();
        for i in k + 1..n {
            let factor = mat[i][k].clone();
            for j in k + 1..width {
                let t = &pivot * &mat[i][j] - &factor * &mat[k][j];
                // exact by the Bareiss identity
                mat[i][j] = t / &prev;
            }
            mat[i][k] = BigInt::zero();
        }
        prev = pivot;
    }

    // back substitution per column
    let mut out = Vec::with_capacity(m);
    for c in 0..m {
        let mut x = vec![BigRational::zero(); n];
        for i in (0..n).rev() {
            let mut acc = BigRational::from(mat[i][n + c].clone());
            for j in i + 1..n {
                acc -= BigRational::from(mat[i][j].clone()) * &x[j];
            }
            if mat[i][i].is_zero() {
                return Err(Error::Singular);
            }
            x[i] = acc / BigRational::from(mat[i][i].clone());
        }
        out.push(x);
    }
    Ok(out)
}

/// Determinant of a small rational matrix by plain Gaussian elimination.
pub fn det_rational(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::from(BigInt::from(1));
    for k in 0..n {
        let pivot_row = match (k..n).find(|&r| !m[r][k].is_zero()) {
            Some(r) => r,
            None => return BigRational::zero(),
        };
        if pivot_row != k {
            m.swap(k, pivot_row);
            det = -det;
        }
        let pivot = m[k][k].clone();
        det *= &pivot;
        for i in k + 1..n {
            let factor = m[i][k].clone() / &pivot;
            for j in k..n {
                let sub = factor.clone() * &m[k][j];
                m[i][j] -= sub;
            }
        }
    }
    det
}
