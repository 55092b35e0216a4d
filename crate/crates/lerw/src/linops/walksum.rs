//! Direct walk-sum evaluation of Green's functions and Poisson kernels on
//! small domains, with rigorous rational tail bounds.
//!
//! This is the enumeration oracle: kernels are summed walk by walk (organized
//! as repeated application of the one-step weight matrix, which sums exactly
//! the same series) up to a length cutoff, and the tail is bounded through
//! exact survival probabilities.  It shares no code with the linear-solve
//! route it is used to check.

use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::linops::FiniteDomain;
use crate::weights::WeightField;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

fn one(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

fn quarter(sign: i8) -> BigRational {
    BigRational::new(BigInt::from(sign as i64), BigInt::from(4))
}

/// One application of the signed one-step matrix: `out[z] = sum_w q(z,w) v[w]`
/// over interior neighbors.
fn step(domain: &FiniteDomain, field: WeightField, v: &[BigRational]) -> Vec<BigRational> {
    domain
        .sites()
        .iter()
        .map(|&z| {
            let mut acc = BigRational::zero();
            for w in z.neighbors() {
                if let Some(wi) = domain.index_of(w) {
                    if !v[wi].is_zero() {
                        acc += quarter(field.edge_sign(z, w)) * &v[wi];
                    }
                }
            }
            acc
        })
        .collect()
}

/// Survival masses `s_t(z) = P^z[walk still inside after t steps]` for
/// `t = 0..=len`, plus their running sums (expected-time partials).
fn survival(domain: &FiniteDomain, len: usize) -> (Vec<BigRational>, Vec<BigRational>) {
    let n = domain.len();
    let mut s = vec![one(1); n];
    let mut expected = vec![one(1); n]; // sum over t<=0
    for _ in 0..len {
        s = step(domain, WeightField::Standard, &s);
        for i in 0..n {
            expected[i] += &s[i];
        }
    }
    (s, expected)
}

/// Result of a truncated walk sum: the exact partial sum and a rigorous
/// bound on the absolute value of the neglected tail.
pub struct WalkSum {
    pub partial: BigRational,
    pub tail_bound: BigRational,
}

/// `G_A(z, w)` as a truncated sum over walks of length `<= max_len`.
///
/// Tail: `|sum_{n>L} (Q^n)_{zw}| <= s_{L+1}(z) * max_y E^y[T]`, and the
/// expected exit time is bounded by its partial sums via
/// `E_max <= partial / (1 - s_max)`.
pub fn green_walk_sum(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    w: Site,
    max_len: usize,
) -> Result<WalkSum> {
    let zi = domain.index_of(z).ok_or(Error::OutsideDomain(z))?;
    let wi = domain.index_of(w).ok_or(Error::OutsideDomain(w))?;

    let mut v = vec![BigRational::zero(); domain.len()];
    v[wi] = one(1);
    let mut partial = if zi == wi { one(1) } else { BigRational::zero() };
    for _ in 0..max_len {
        v = step(domain, field, &v);
        partial += &v[zi];
    }

    let (s, expected) = survival(domain, max_len + 1);
    let s_max = s.iter().max().cloned().unwrap();
    if s_max >= one(1) {
        return Err(Error::NotConverged(
            "cutoff too short for a useful tail bound".into(),
        ));
    }
    let e_partial_max = expected.iter().max().cloned().unwrap();
    let e_max = e_partial_max / (one(1) - &s_max);
    let tail_bound = s[zi].clone() * e_max;
    Ok(WalkSum {
        partial,
        tail_bound,
    })
}

/// `H_A(z, w)` as a truncated sum over walks of length `<= max_len` ending
/// at the boundary site `w`.  The tail is bounded by the surviving mass
/// (the escaping kernel is dominated by total harmonic measure, which is 1).
pub fn poisson_walk_sum(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    w: Site,
    max_len: usize,
) -> Result<WalkSum> {
    let zi = domain.index_of(z).ok_or(Error::OutsideDomain(z))?;
    if !domain.is_boundary(w) {
        return Err(Error::OutsideDomain(w));
    }

    // entry vector: one final step from interior neighbors of w
    let mut v: Vec<BigRational> = domain
        .sites()
        .iter()
        .map(|&y| {
            if y.is_neighbor(w) {
                quarter(field.edge_sign(y, w))
            } else {
                BigRational::zero()
            }
        })
        .collect();
    let mut partial = v[zi].clone();
    for _ in 0..max_len {
        v = step(domain, field, &v);
        partial += &v[zi];
    }

    let (s, _) = survival(domain, max_len + 1);
    Ok(WalkSum {
        partial,
        tail_bound: s[zi].clone(),
    })
}
