//! Edge weights for the two walk measures on `Z^2`.
//!
//! The standard field assigns `1/4` to every nearest-neighbor edge.  The
//! zipper field flips the sign of the vertical edges `{k, k-i}` for integer
//! `k >= 1`, i.e. the edges crossing the horizontal cut just below the
//! positive real axis.  Walk weights are products of edge weights, so a loop
//! picks up `(-1)^J` where `J` counts its crossings of the cut.

use crate::error::{Error, Result};
use crate::lattice::Site;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::One;
use serde::{Deserialize, Serialize};

/// The two edge-weight assignments used throughout the crate.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum WeightField {
    /// Simple random walk weights `p(z,w) = 1/4`.
    Standard,
    /// Signed weights `q` with the cut below the positive real axis.
    Zipper,
}

impl WeightField {
    /// Sign of the edge `{z, w}`: `-1` exactly for the zipper edges
    /// `{(k,0), (k,-1)}` with `k >= 1`.
    pub fn edge_sign(self, z: Site, w: Site) -> i8 {
        match self {
            WeightField::Standard => 1,
            WeightField::Zipper => {
                let (top, bot) = if z.y > w.y { (z, w) } else { (w, z) };
                if top.y == 0 && bot.y == -1 && top.x == bot.x && top.x >= 1 {
                    -1
                } else {
                    1
                }
            }
        }
    }

    /// Exact edge weight `+-1/4`.
    pub fn weight(self, z: Site, w: Site) -> Result<Rational64> {
        if !z.is_neighbor(w) {
            return Err(Error::NotNeighbor(z, w));
        }
        Ok(Rational64::new(self.edge_sign(z, w) as i64, 4))
    }

    /// Edge weight as a float, for the sparse solvers.  The caller is
    /// responsible for only passing nearest neighbors.
    #[inline]
    pub fn weight_f64(self, z: Site, w: Site) -> f64 {
        0.25 * self.edge_sign(z, w) as f64
    }

    /// Product of the edge weights along `walk`; the length-0 walk has
    /// weight 1 by convention.
    pub fn walk_weight(self, walk: &[Site]) -> Result<BigRational> {
        let mut sign = 1i8;
        for pair in walk.windows(2) {
            if !pair[0].is_neighbor(pair[1]) {
                return Err(Error::NotNeighbor(pair[0], pair[1]));
            }
            sign *= self.edge_sign(pair[0], pair[1]);
        }
        let steps = walk.len().saturating_sub(1);
        let denom = BigInt::one() << (2 * steps as u32); // 4^steps
        Ok(BigRational::new(BigInt::from(sign), denom))
    }
}

/// Parity `(-1)^J` of the number of crossings of the cut
/// `{x - i/2 : x >= 1/2}` by a closed loop, computed geometrically from the
/// traversed edges.  This equals the sign of the zipper weight of the loop
/// divided by `(1/4)^len`, and for loops avoiding the cell around `(1/2,-1/2)`
/// it is the winding parity about that point.
pub fn winding_parity(walk: &[Site]) -> Result<i8> {
    let (first, last) = match (walk.first(), walk.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::NotLoop(Site::ORIGIN, Site::ORIGIN)),
    };
    if first != last {
        return Err(Error::NotLoop(first, last));
    }
    let mut crossings = 0u64;
    for pair in walk.windows(2) {
        if !pair[0].is_neighbor(pair[1]) {
            return Err(Error::NotNeighbor(pair[0], pair[1]));
        }
        if WeightField::Zipper.edge_sign(pair[0], pair[1]) < 0 {
            crossings += 1;
        }
    }
    Ok(if crossings % 2 == 0 { 1 } else { -1 })
}

/// Winding number of a closed lattice loop about the half-integer point
/// `(1/2, -1/2)`, by summing the signed turning angle.  Used as an
/// independent check of [`winding_parity`].
pub fn winding_number_about_anchor(walk: &[Site]) -> Result<i64> {
    let (first, last) = match (walk.first(), walk.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::NotLoop(Site::ORIGIN, Site::ORIGIN)),
    };
    if first != last {
        return Err(Error::NotLoop(first, last));
    }
    let (ax, ay) = (0.5f64, -0.5f64);
    let mut total = 0.0f64;
    for pair in walk.windows(2) {
        let a = ((pair[0].y as f64) - ay).atan2((pair[0].x as f64) - ax);
        let b = ((pair[1].y as f64) - ay).atan2((pair[1].x as f64) - ax);
        let mut d = b - a;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}
