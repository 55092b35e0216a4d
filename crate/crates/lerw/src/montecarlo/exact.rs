//! Exact enumeration oracle for the two-walk events on tiny domains.
//!
//! The oracle organizes the sum over all walk pairs of bounded length as a
//! dynamic program over loop-erasure states, with exact rational arithmetic
//! and a rigorous bound on the truncated mass.  It is independent of the
//! samplers it checks.

use super::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;

type Rat = BigRational;

fn quarter() -> Rat {
    Rat::new(BigInt::from(1), BigInt::from(4))
}

/// Distribution of `LE(S[0,T])` for a walk from `start` in `domain`,
/// truncated at `max_len` steps, with walks killed (mass dropped) on
/// entering `kill` at any time after zero.  Returns the map from the final
/// loop-erased path (including the exit site) to its probability, plus the
/// unresolved mass still walking at the cutoff.
fn le_distribution(
    domain: &FiniteDomain,
    start: Site,
    kill: &HashSet<Site>,
    max_len: usize,
) -> (HashMap<Vec<Site>, Rat>, Rat) {
    let mut states: HashMap<Vec<Site>, Rat> = HashMap::new();
    states.insert(vec![start], Rat::one());
    let mut out: HashMap<Vec<Site>, Rat> = HashMap::new();
    for _ in 0..max_len {
        let mut next: HashMap<Vec<Site>, Rat> = HashMap::new();
        for (le, p) in states {
            let share = p * quarter();
            let cur = *le.last().unwrap();
            for w in cur.neighbors() {
                if kill.contains(&w) {
                    continue;
                }
                if !domain.contains(w) {
                    let mut done = le.clone();
                    done.push(w);
                    *out.entry(done).or_insert_with(Rat::zero) += share.clone();
                } else if let Some(i) = le.iter().position(|&s| s == w) {
                    let truncated = le[..=i].to_vec();
                    *next.entry(truncated).or_insert_with(Rat::zero) += share.clone();
                } else {
                    let mut grown = le.clone();
                    grown.push(w);
                    *next.entry(grown).or_insert_with(Rat::zero) += share.clone();
                }
            }
        }
        states = next;
    }
    let unresolved = states.values().fold(Rat::zero(), |a, b| a + b);
    (out, unresolved)
}

/// `P[S[1..T] avoids `forbidden` entirely, exit site included]` for a walk
/// from the origin, by an exact hitting-probability solve.
fn avoid_probability(domain: &FiniteDomain, forbidden: &HashSet<Site>) -> Rat {
    let interior_forbidden: Vec<Site> = domain
        .sites()
        .iter()
        .copied()
        .filter(|s| forbidden.contains(s))
        .collect();
    let sub = domain.minus(&interior_forbidden);
    let sol = sub
        .solve_dirichlet_rational(crate::weights::WeightField::Standard, |w| {
            if forbidden.contains(&w) {
                Rat::zero()
            } else {
                Rat::one()
            }
        })
        .unwrap();
    let value_at = |w: Site| -> Rat {
        if forbidden.contains(&w) {
            Rat::zero()
        } else if let Some(i) = sub.index_of(w) {
            sol[i].clone()
        } else {
            Rat::one()
        }
    };
    Site::ORIGIN
        .neighbors()
        .iter()
        .map(|&w| quarter() * value_at(w))
        .fold(Rat::zero(), |a, b| a + b)
}

/// Exact `P[V_A]` with a truncation bound.
pub fn va_probability(domain: &FiniteDomain, max_len: usize) -> (Rat, Rat) {
    let no_kill = HashSet::new();
    let (le_dist, eps) = le_distribution(domain, Site::ORIGIN, &no_kill, max_len);
    let mut total = Rat::zero();
    for (le, p) in &le_dist {
        let set: HashSet<Site> = le.iter().copied().collect();
        total += p.clone() * avoid_probability(domain, &set);
    }
    (total, eps)
}

/// Exact `phi_A(eta)` with a truncation bound: walk one from the forward
/// tip and walk two from the origin must escape before revisiting `eta`,
/// with the loop erasure of walk one avoided by walk two.
pub fn phi_exact(domain: &FiniteDomain, eta: &Saw, max_len: usize) -> (Rat, Rat) {
    let eta_set: HashSet<Site> = eta.vertices().iter().copied().collect();
    let (le_dist, eps) = le_distribution(domain, eta.plus_end(), &eta_set, max_len);
    let mut total = Rat::zero();
    for (le, p) in &le_dist {
        let mut forbidden: HashSet<Site> = le.iter().copied().collect();
        forbidden.extend(eta_set.iter().copied());
        total += p.clone() * avoid_probability(domain, &forbidden);
    }
    (total, eps)
}

/// DP for the second walk: probability that its loop erasure starts with
/// the given forward vertices while avoiding `le1` from time one on.
fn le2_prefix_probability(
    domain: &FiniteDomain,
    le1: &HashSet<Site>,
    forward: &[Site],
    max_len: usize,
) -> (Rat, Rat) {
    let mut states: HashMap<Vec<Site>, Rat> = HashMap::new();
    states.insert(vec![Site::ORIGIN], Rat::one());
    let mut success = Rat::zero();
    for _ in 0..max_len {
        let mut next: HashMap<Vec<Site>, Rat> = HashMap::new();
        for (le, p) in states {
            let share = p * quarter();
            let cur = *le.last().unwrap();
            for w in cur.neighbors() {
                if le1.contains(&w) {
                    continue; // intersection: the event fails
                }
                if !domain.contains(w) {
                    let mut done = le.clone();
                    done.push(w);
                    if done.len() > forward.len() && done[1..=forward.len()] == *forward {
                        success += share.clone();
                    }
                } else if let Some(i) = le.iter().position(|&s| s == w) {
                    *next.entry(le[..=i].to_vec()).or_insert_with(Rat::zero) += share.clone();
                } else {
                    let mut grown = le.clone();
                    grown.push(w);
                    *next.entry(grown).or_insert_with(Rat::zero) += share.clone();
                }
            }
        }
        states = next;
    }
    let unresolved = states.values().fold(Rat::zero(), |a, b| a + b);
    (success, unresolved)
}

/// Exact numerator and denominator of `p_A(eta)`, each with its truncation
/// bound: `(P[V_A^eta], err, P[V_A], err)`.
pub fn phat_a_oracle(domain: &FiniteDomain, eta: &Saw, max_len: usize) -> (Rat, Rat, Rat, Rat) {
    let j = eta.backward_len();
    let backward: Vec<Site> = (1..=j)
        .map(|i| eta.get(-(i as isize)).unwrap())
        .collect();
    let forward: Vec<Site> = (1..=eta.forward_len())
        .map(|i| eta.get(i as isize).unwrap())
        .collect();

    let no_kill = HashSet::new();
    let (le_dist, eps1) = le_distribution(domain, Site::ORIGIN, &no_kill, max_len);
    let mut num = Rat::zero();
    let mut num_err = eps1.clone();
    let mut den = Rat::zero();
    for (le1, p) in &le_dist {
        let set: HashSet<Site> = le1.iter().copied().collect();
        den += p.clone() * avoid_probability(domain, &set);
        // the reversed first walk supplies the backward part of the
        // concatenated path
        let backward_matches =
            le1.len() > backward.len() && le1[1..=backward.len()] == backward[..];
        if !backward_matches {
            continue;
        }
        let (succ, eps2) = le2_prefix_probability(domain, &set, &forward, max_len);
        num += p.clone() * succ;
        num_err += p.clone() * eps2;
    }
    (num, num_err, den, eps1)
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn va_single_site_is_three_quarters() {
        let domain = FiniteDomain::from_sites(vec![Site::ORIGIN]);
        let (p, err) = va_probability(&domain, 4);
        assert_eq!(p, Rat::new(BigInt::from(3), BigInt::from(4)));
        assert!(err.is_zero());
    }

    #[test]
    fn va_disk_two_matches_sampler() {
        let domain = FiniteDomain::disk(2.0);
        assert_eq!(domain.len(), 9);
        let (p, err) = va_probability(&domain, 64);
        assert!(to_f64(&err) < 1e-8, "truncation {}", to_f64(&err));

        let mc_domain = McDomain::from_domain(&domain);
        let n = 120_000u64;
        let mut holds = 0u64;
        for i in 0..n {
            holds += sample_v_a(&mc_domain, RngStream::new(77, phase_stream(0, i)))
                .unwrap()
                .holds as u64;
        }
        let est = McEstimate::frequency(holds, n);
        let gap = (est.value - to_f64(&p)).abs();
        assert!(
            gap < 3.0 * est.standard_error + to_f64(&err),
            "oracle {} vs sampler {} +- {}",
            to_f64(&p),
            est.value,
            est.standard_error
        );
    }

    #[test]
    fn phat_estimator_matches_oracle_on_disk_two() {
        let domain = FiniteDomain::disk(2.0);
        let eta: Saw = "(0,0);(1,0)".parse().unwrap();
        let (num, num_err, den, den_err) = phat_a_oracle(&domain, &eta, 64);
        let oracle = to_f64(&(num / &den));
        let oracle_err = to_f64(&num_err) + to_f64(&den_err);
        assert!(oracle_err < 1e-7);

        let est = phat_a_empirical(
            &McDomain::from_domain(&domain),
            &eta,
            31,
            120_000,
            1_000,
            None,
        )
        .unwrap();
        let gap = (est.value - oracle).abs();
        assert!(
            gap < 3.0 * est.standard_error + oracle_err,
            "oracle {oracle} vs estimator {} +- {}",
            est.value,
            est.standard_error
        );
    }

    #[test]
    fn finite_volume_product_identity() {
        // p_A(eta) = (2d)^(-len) * F_eta(A \ {0}) * phi_A(eta) / phi_A(0)
        // holds exactly at every finite domain; checking it in rational
        // arithmetic pins down every event convention at once
        let domain = FiniteDomain::disk(2.0);
        let eta: Saw = "(0,0);(1,0)".parse().unwrap();
        let max_len = 64;

        let (num, num_err, den, den_err) = phat_a_oracle(&domain, &eta, max_len);
        let lhs = num / &den;

        let f_eta = crate::linops::loop_term_rational(&domain, eta.vertices()).unwrap();
        let (phi_eta, phi_eta_err) = phi_exact(&domain, &eta, max_len);
        let (phi_0, phi_0_err) = phi_exact(&domain, &Saw::trivial(), max_len);
        let rhs = Rat::new(BigInt::from(1), BigInt::from(4)) * f_eta * &phi_eta / &phi_0;

        let tol = to_f64(&num_err) / to_f64(&den)
            + to_f64(&den_err)
            + to_f64(&phi_eta_err) / to_f64(&phi_0)
            + to_f64(&phi_0_err);
        let gap = to_f64(&(lhs.clone() - &rhs)).abs();
        assert!(
            gap <= 4.0 * tol + 1e-12,
            "identity gap {gap:.3e} (tol {tol:.3e}): lhs {} rhs {}",
            to_f64(&lhs),
            to_f64(&rhs)
        );
    }

    #[test]
    fn finite_volume_product_identity_two_edges() {
        // the same identity for a bent two-edge walk exercises the chain
        let domain = FiniteDomain::disk(2.0);
        let eta: Saw = "(0,0);(0,1);(-1,1)".parse().unwrap();
        let max_len = 64;

        let (num, num_err, den, den_err) = phat_a_oracle(&domain, &eta, max_len);
        let lhs = num / &den;

        let f_eta = crate::linops::loop_term_rational(&domain, eta.vertices()).unwrap();
        let (phi_eta, phi_eta_err) = phi_exact(&domain, &eta, max_len);
        let (phi_0, phi_0_err) = phi_exact(&domain, &Saw::trivial(), max_len);
        let rhs = Rat::new(BigInt::from(1), BigInt::from(16)) * f_eta * &phi_eta / &phi_0;

        let tol = to_f64(&num_err) / to_f64(&den)
            + to_f64(&den_err)
            + to_f64(&phi_eta_err) / to_f64(&phi_0)
            + to_f64(&phi_0_err);
        let gap = to_f64(&(lhs.clone() - &rhs)).abs();
        assert!(
            gap <= 4.0 * tol + 1e-12,
            "identity gap {gap:.3e} (tol {tol:.3e}): lhs {} rhs {}",
            to_f64(&lhs),
            to_f64(&rhs)
        );
    }

    #[test]
    fn oracle_respects_lattice_symmetry() {
        // the exact ratio for [0,1] equals the one for [0,i]
        let domain = FiniteDomain::disk(2.0);
        let right: Saw = "(0,0);(1,0)".parse().unwrap();
        let up: Saw = "(0,0);(0,1)".parse().unwrap();
        let (n1, _, d1, _) = phat_a_oracle(&domain, &right, 48);
        let (n2, _, d2, _) = phat_a_oracle(&domain, &up, 48);
        assert_eq!(n1 / d1, n2 / d2);
    }

    #[test]
    fn two_sided_prefix_oracle_consistent_with_sampler() {
        let domain = FiniteDomain::disk(2.0);
        let eta: Saw = "(0,-1);(0,0);(1,0)".parse().unwrap();
        let (num, num_err, den, den_err) = phat_a_oracle(&domain, &eta, 64);
        let oracle = to_f64(&(num / &den));
        let est = phat_a_empirical(
            &McDomain::from_domain(&domain),
            &eta,
            32,
            150_000,
            1_000,
            None,
        )
        .unwrap();
        let gap = (est.value - oracle).abs();
        assert!(
            gap < 3.0 * est.standard_error + to_f64(&num_err) + to_f64(&den_err),
            "oracle {oracle} vs estimator {}",
            est.value
        );
    }
}
