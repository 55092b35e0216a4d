//! The sampling route on `Z^d` for `d >= 3`.
//!
//! The two-walk escape estimators and the Green's-function factors carry
//! over verbatim to higher dimensions; only the lattice plumbing changes.
//! The determinant route stays two-dimensional, so this module keeps its own
//! minimal site type instead of generalizing the planar one.

use crate::error::{Error, Result};
use crate::estimate::{extrapolate_dyadic, Estimate, ExtrapolationPolicy};
use crate::montecarlo::{phase_stream, McEstimate, RngStream, WALK_STEP_CAP};
use crate::solve::{cg_solve, Csr, SolverOptions};
use rand::Rng;
use rayon::prelude::*;
use crate::fxhash::{FxHashMap, FxHashSet};
use std::collections::{HashMap, HashSet};

/// A point of `Z^D`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SiteD<const D: usize>(pub [i64; D]);

impl<const D: usize> SiteD<D> {
    pub fn origin() -> Self {
        SiteD([0; D])
    }

    pub fn unit(axis: usize) -> Self {
        let mut c = [0; D];
        c[axis] = 1;
        SiteD(c)
    }

    pub fn abs2(self) -> i64 {
        self.0.iter().map(|&x| x * x).sum()
    }

    fn step(self, dir: usize) -> Self {
        let mut c = self.0;
        c[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        SiteD(c)
    }

    pub fn neighbors(self) -> Vec<SiteD<D>> {
        (0..2 * D).map(|dir| self.step(dir)).collect()
    }
}

fn in_ball<const D: usize>(s: SiteD<D>, r: f64) -> bool {
    (s.abs2() as f64) < r * r
}

/// Chronological loop erasure on `Z^D`.
pub fn loop_erase_d<const D: usize>(walk: &[SiteD<D>]) -> Vec<SiteD<D>> {
    let mut path: Vec<SiteD<D>> = Vec::new();
    let mut pos: FxHashMap<SiteD<D>, usize> = FxHashMap::default();
    for &s in walk {
        match pos.get(&s) {
            Some(&i) => {
                for dropped in path.drain(i + 1..) {
                    pos.remove(&dropped);
                }
            }
            None => {
                pos.insert(s, path.len());
                path.push(s);
            }
        }
    }
    path
}

/// The two-walk escape event on the ball of radius `r` (the `phi` event).
fn phi_event_d<const D: usize>(
    eta_set: &FxHashSet<SiteD<D>>,
    tip: SiteD<D>,
    r: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> bool {
    let mut path1 = Vec::with_capacity(64);
    path1.push(tip);
    let mut cur = tip;
    loop {
        cur = cur.step(rng.gen_range(0..2 * D));
        if eta_set.contains(&cur) {
            return false;
        }
        path1.push(cur);
        if !in_ball(cur, r) {
            break;
        }
        if path1.len() > WALK_STEP_CAP {
            return false;
        }
    }
    let le1: FxHashSet<SiteD<D>> = loop_erase_d(&path1).into_iter().collect();

    let mut cur = SiteD::<D>::origin();
    let mut steps = 0usize;
    loop {
        cur = cur.step(rng.gen_range(0..2 * D));
        if eta_set.contains(&cur) || le1.contains(&cur) {
            return false;
        }
        if !in_ball(cur, r) {
            return true;
        }
        steps += 1;
        if steps > WALK_STEP_CAP {
            return false;
        }
    }
}

/// Raw `phi` event probability on the ball of radius `r`.  The walk `eta`
/// is given in path order starting at the origin.
pub fn phi_raw_d<const D: usize>(
    eta: &[SiteD<D>],
    r: f64,
    seed: u64,
    phase: u64,
    n_samples: u64,
) -> McEstimate {
    assert_eq!(eta[0], SiteD::origin(), "walk must start at the origin");
    let eta_set: FxHashSet<SiteD<D>> = eta.iter().copied().collect();
    let tip = *eta.last().unwrap();
    let count = (0..n_samples as usize)
        .into_par_iter()
        .with_min_len(1 << 12)
        .map(|i| {
            let mut rng = RngStream::new(seed, phase_stream(phase, i as u64)).rng();
            phi_event_d(&eta_set, tip, r, &mut rng) as u64
        })
        .sum();
    McEstimate::frequency(count, n_samples)
}

/// A ball domain in `Z^D` with its Green's function solves.
struct BallDomain<const D: usize> {
    sites: Vec<SiteD<D>>,
    index: HashMap<SiteD<D>, u32>,
}

impl<const D: usize> BallDomain<D> {
    fn new(r: f64, removed: &HashSet<SiteD<D>>) -> Self {
        let bound = r.ceil() as i64;
        let mut sites = Vec::new();
        let mut cursor = SiteD::<D>([(-bound); D]);
        // odometer enumeration of the cube, filtered to the ball
        'outer: loop {
            if in_ball(cursor, r) && !removed.contains(&cursor) {
                sites.push(cursor);
            }
            for axis in 0..D {
                if cursor.0[axis] < bound {
                    cursor.0[axis] += 1;
                    continue 'outer;
                }
                cursor.0[axis] = -bound;
            }
            break;
        }
        let index = sites
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, i as u32))
            .collect();
        BallDomain { sites, index }
    }

    fn assemble(&self) -> Csr {
        let weight = 1.0 / (2 * D) as f64;
        let mut indptr = vec![0u32];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &z in &self.sites {
            for w in z.neighbors() {
                if let Some(&j) = self.index.get(&w) {
                    indices.push(j);
                    values.push(-weight);
                }
            }
            indptr.push(indices.len() as u32);
        }
        Csr {
            n: self.sites.len(),
            indptr,
            indices,
            values,
        }
    }

    fn green_diag(&self, z: SiteD<D>, opts: SolverOptions) -> Result<f64> {
        let zi = *self
            .index
            .get(&z)
            .ok_or_else(|| Error::Parse(format!("site {z:?} outside ball")))? as usize;
        let mut rhs = vec![0.0; self.sites.len()];
        rhs[zi] = 1.0;
        Ok(cg_solve(&self.assemble(), &rhs, opts)?[zi])
    }
}

/// `G_{Z^D \ eta}(zeta, zeta)` by ball exhaustion; for `d >= 3` the error
/// decays like `R^(2-d)`.
pub fn green_diag_d<const D: usize>(
    eta: &[SiteD<D>],
    zeta: SiteD<D>,
    radii: &[f64],
    opts: SolverOptions,
) -> Result<Estimate> {
    let removed: HashSet<SiteD<D>> = eta.iter().copied().collect();
    let values = radii
        .iter()
        .map(|&r| BallDomain::new(r, &removed).green_diag(zeta, opts))
        .collect::<Result<Vec<_>>>()?;
    extrapolate_dyadic(&values, ExtrapolationPolicy::fixed((D - 2) as f64))
}

/// Loop term `prod_j G(ball \ prefix)(x_j, x_j)` at one ball radius.
fn loop_term_at_radius_d<const D: usize>(
    eta: &[SiteD<D>],
    r: f64,
    opts: SolverOptions,
) -> Result<f64> {
    let mut acc = 1.0;
    for j in 1..eta.len() {
        let removed: HashSet<SiteD<D>> = eta[..j].iter().copied().collect();
        acc *= BallDomain::new(r, &removed).green_diag(eta[j], opts)?;
    }
    Ok(acc)
}

/// Path weight `(2d)^(-len) * F_eta * phi(eta)` on `Z^D`, each factor taken
/// along its own exhaustion schedule.
pub fn phat_green_phi_d<const D: usize>(
    eta: &[SiteD<D>],
    green_radii: &[f64],
    phi_radii: &[f64],
    seed: u64,
    n_samples: u64,
    min_accepted: u64,
    opts: SolverOptions,
) -> Result<Estimate> {
    let edges = eta.len() - 1;
    let products = green_radii
        .iter()
        .map(|&r| loop_term_at_radius_d(eta, r, opts))
        .collect::<Result<Vec<_>>>()?;
    let loop_term = extrapolate_dyadic(&products, ExtrapolationPolicy::fixed((D - 2) as f64))?;

    let mut ratios = Vec::new();
    for (k, &r) in phi_radii.iter().enumerate() {
        let num = phi_raw_d(eta, r, seed, 2 * (k as u64 + 1), n_samples);
        let den = phi_raw_d(&[SiteD::<D>::origin()], r, seed, 2 * (k as u64 + 1) + 1, n_samples);
        for side in [&num, &den] {
            if side.n_accepted < min_accepted {
                return Err(Error::InsufficientAcceptance {
                    got: side.n_accepted,
                    min: min_accepted,
                });
            }
        }
        ratios.push(McEstimate::independent_ratio(num, den)?);
    }
    let last = ratios[ratios.len() - 1];
    let trend = if ratios.len() >= 2 {
        (last.value - ratios[ratios.len() - 2].value).abs()
    } else {
        0.0
    };
    let phi = Estimate::monte_carlo(last.value, last.standard_error + 0.5 * trend);

    let step_weight = (2 * D) as f64;
    Ok(loop_term.mul(phi).scale(step_weight.powi(-(edges as i32))))
}

/// Matched-domain transition probability on `Z^D`:
/// `(1/2d) G_{B_R \ eta}(zeta, zeta) * phi_R(eta^zeta) / phi_R(eta)`,
/// extrapolated over the schedule.
pub fn transition_prob_green_d<const D: usize>(
    eta: &[SiteD<D>],
    zeta: SiteD<D>,
    radii: &[f64],
    seed: u64,
    n_samples: u64,
    min_accepted: u64,
    opts: SolverOptions,
) -> Result<Estimate> {
    if eta.contains(&zeta) {
        return Err(Error::Parse(format!("{zeta:?} already on the walk")));
    }
    let mut extended = eta.to_vec();
    extended.push(zeta);
    let removed: HashSet<SiteD<D>> = eta.iter().copied().collect();

    let mut values = Vec::new();
    let mut noise = 0.0f64;
    for (k, &r) in radii.iter().enumerate() {
        let g = BallDomain::new(r, &removed).green_diag(zeta, opts)?;
        let num = phi_raw_d(&extended, r, seed, 100 + 2 * k as u64, n_samples);
        let den = phi_raw_d(eta, r, seed, 101 + 2 * k as u64, n_samples);
        for side in [&num, &den] {
            if side.n_accepted < min_accepted {
                return Err(Error::InsufficientAcceptance {
                    got: side.n_accepted,
                    min: min_accepted,
                });
            }
        }
        let ratio = McEstimate::independent_ratio(num, den)?;
        let value = g / (2 * D) as f64 * ratio.value;
        noise = noise.max(value * ratio.standard_error / ratio.value);
        values.push(value);
    }
    let last = values[values.len() - 1];
    let trend = if values.len() >= 2 {
        (last - values[values.len() - 2]).abs()
    } else {
        0.0
    };
    Ok(Estimate::monte_carlo(last, noise + 0.5 * trend))
}

#[cfg(test)]
mod tests {
    use super::*;

    type S3 = SiteD<3>;

    fn e1() -> S3 {
        SiteD::unit(0)
    }

    #[test]
    fn loop_erase_generic_matches_planar_behavior() {
        let o = S3::origin();
        let a = e1();
        let walk = vec![o, a, o, SiteD([0, 1, 0])];
        assert_eq!(loop_erase_d(&walk), vec![o, SiteD([0, 1, 0])]);
    }

    #[test]
    fn single_edge_weight_is_one_over_2d() {
        // p([0, e1]) = 1/6 on Z^3 from the product formula
        let eta = vec![S3::origin(), e1()];
        let est = phat_green_phi_d(
            &eta,
            &[6.0, 12.0],
            &[6.0, 12.0],
            1234,
            150_000,
            2_000,
            SolverOptions::default(),
        )
        .unwrap();
        let target = 1.0 / 6.0;
        assert!(
            (est.value - target).abs() < 3.0 * est.error.max(2e-3),
            "p = {} +- {}",
            est.value,
            est.error
        );
    }

    #[test]
    fn transitions_from_one_edge_sum_to_one() {
        let eta = vec![S3::origin(), e1()];
        let extensions: Vec<S3> = e1()
            .neighbors()
            .into_iter()
            .filter(|z| !eta.contains(z))
            .collect();
        assert_eq!(extensions.len(), 5);
        let mut total = 0.0;
        let mut err = 0.0;
        for (i, &zeta) in extensions.iter().enumerate() {
            let est = transition_prob_green_d(
                &eta,
                zeta,
                &[8.0, 16.0],
                500 + i as u64,
                120_000,
                2_000,
                SolverOptions::default(),
            )
            .unwrap();
            total += est.value;
            err += est.error;
        }
        assert!(
            (total - 1.0).abs() < 3.0 * err.max(0.01),
            "sum {total} +- {err}"
        );
    }
}
