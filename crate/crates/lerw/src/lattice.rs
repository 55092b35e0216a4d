//! Lattice sites, two-sided self-avoiding walks, and the dihedral symmetries
//! of `Z^2`.
//!
//! A [`Saw`] is stored as a vertex list together with the position of the
//! origin in that list, so a walk with `j` backward and `k` forward steps has
//! `j + k + 1` vertices and `origin_index = j`.  All two-sided index
//! arithmetic is derived from that single representation.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A point of `Z^2`, viewed as `x + iy` when complex notation is convenient.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    /// The four nearest neighbors, in the fixed order `+1, -1, +i, -i`.
    pub fn neighbors(self) -> [Site; 4] {
        [
            Site::new(self.x + 1, self.y),
            Site::new(self.x - 1, self.y),
            Site::new(self.x, self.y + 1),
            Site::new(self.x, self.y - 1),
        ]
    }

    pub fn is_neighbor(self, other: Site) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }

    /// Squared Euclidean norm `x^2 + y^2`.
    pub fn abs2(self) -> i64 {
        self.x * self.x + self.y * self.y
    }

    pub fn abs(self) -> f64 {
        (self.abs2() as f64).sqrt()
    }

    /// Argument in `[0, 2*pi)`.
    pub fn theta(self) -> f64 {
        let t = (self.y as f64).atan2(self.x as f64);
        if t < 0.0 {
            t + 2.0 * std::f64::consts::PI
        } else {
            t
        }
    }

    /// On the non-negative real axis `{0, 1, 2, ...}`.
    pub fn on_positive_axis(self) -> bool {
        self.y == 0 && self.x >= 0
    }

    /// On the non-positive real axis `{0, -1, -2, ...}`.
    pub fn on_negative_axis(self) -> bool {
        self.y == 0 && self.x <= 0
    }

    /// Coordinates as a vector; the 2d lattice is the primary case.
    pub fn coords(self) -> [i64; 2] {
        [self.x, self.y]
    }

    /// Multiplication by `i` (rotation by 90 degrees).
    pub fn rot90(self) -> Site {
        Site::new(-self.y, self.x)
    }

    /// Complex conjugate (reflection across the real axis).
    pub fn conj(self) -> Site {
        Site::new(self.x, -self.y)
    }

    pub fn translate(self, dx: i64, dy: i64) -> Site {
        Site::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected \"(x,y)\", got {s:?}")))?;
        let mut parts = inner.splitn(2, ',');
        let x = parts
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad x coordinate in {s:?}")))?;
        let y = parts
            .next()
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad y coordinate in {s:?}")))?;
        Ok(Site::new(x, y))
    }
}

/// One of the eight dihedral symmetries of `Z^2` fixing the origin:
/// an optional reflection across the real axis followed by a rotation
/// by `rot * 90` degrees.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Symmetry {
    pub rot: u8,
    pub reflect: bool,
}

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry {
        rot: 0,
        reflect: false,
    };

    /// All eight group elements.
    pub fn all() -> [Symmetry; 8] {
        let mut out = [Symmetry::IDENTITY; 8];
        for r in 0..4u8 {
            out[r as usize] = Symmetry {
                rot: r,
                reflect: false,
            };
            out[4 + r as usize] = Symmetry {
                rot: r,
                reflect: true,
            };
        }
        out
    }

    /// Pure rotation by `rot * 90` degrees.
    pub fn rotation(rot: u8) -> Symmetry {
        Symmetry {
            rot: rot % 4,
            reflect: false,
        }
    }

    pub fn apply(self, s: Site) -> Site {
        let mut p = if self.reflect { s.conj() } else { s };
        for _ in 0..self.rot {
            p = p.rot90();
        }
        p
    }

    pub fn inverse(self) -> Symmetry {
        if self.reflect {
            // reflections are involutions in this parametrization:
            // conj then rot r, inverted, is rot -r then conj = conj then rot r.
            self
        } else {
            Symmetry {
                rot: (4 - self.rot) % 4,
                reflect: false,
            }
        }
    }
}

/// A finite two-sided self-avoiding walk through the origin.
///
/// Vertices are listed from `eta_-` to `eta_+`; `origin_index` locates the
/// origin vertex, so negative indices reach the backward part.  Equality is
/// exact vertexwise equality including `origin_index`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Saw {
    vertices: Vec<Site>,
    origin_index: usize,
}

impl Saw {
    /// Builds a walk, checking the nearest-neighbor, distinctness and
    /// origin-placement invariants.
    pub fn new(vertices: Vec<Site>, origin_index: usize) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidWalk("empty vertex list".into()));
        }
        if origin_index >= vertices.len() || vertices[origin_index] != Site::ORIGIN {
            return Err(Error::OriginMissing);
        }
        for pair in vertices.windows(2) {
            if !pair[0].is_neighbor(pair[1]) {
                return Err(Error::NotNeighbor(pair[0], pair[1]));
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(vertices.len());
        for &v in &vertices {
            if !seen.insert(v) {
                return Err(Error::SelfIntersection(v));
            }
        }
        Ok(Saw {
            vertices,
            origin_index,
        })
    }

    /// Builds a walk locating the origin automatically.
    pub fn from_vertices(vertices: Vec<Site>) -> Result<Self> {
        let origin_index = vertices
            .iter()
            .position(|&v| v == Site::ORIGIN)
            .ok_or(Error::OriginMissing)?;
        Saw::new(vertices, origin_index)
    }

    /// The trivial walk `[0]`.
    pub fn trivial() -> Saw {
        Saw {
            vertices: vec![Site::ORIGIN],
            origin_index: 0,
        }
    }

    pub fn vertices(&self) -> &[Site] {
        &self.vertices
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index
    }

    /// Number of backward steps `j` (the walk lies in `W_{j,k}`).
    pub fn backward_len(&self) -> usize {
        self.origin_index
    }

    /// Number of forward steps `k`.
    pub fn forward_len(&self) -> usize {
        self.vertices.len() - 1 - self.origin_index
    }

    /// Number of edges (the walk's length).
    pub fn edge_count(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Two-sided indexing: `get(0)` is the origin, `get(-j)` the initial
    /// vertex, `get(k)` the terminal vertex.
    pub fn get(&self, i: isize) -> Option<Site> {
        let idx = self.origin_index as isize + i;
        if idx < 0 {
            None
        } else {
            self.vertices.get(idx as usize).copied()
        }
    }

    /// Initial vertex `eta_-`.
    pub fn minus_end(&self) -> Site {
        self.vertices[0]
    }

    /// Terminal vertex `eta_+`.
    pub fn plus_end(&self) -> Site {
        *self.vertices.last().unwrap()
    }

    pub fn contains(&self, s: Site) -> bool {
        self.vertices.contains(&s)
    }

    /// Largest Euclidean norm over the vertices.
    pub fn max_abs(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// Appends `zeta` after `eta_+`, keeping the origin in place.
    pub fn concat_step(&self, zeta: Site) -> Result<Saw> {
        if !self.plus_end().is_neighbor(zeta) {
            return Err(Error::NotNeighbor(self.plus_end(), zeta));
        }
        if self.contains(zeta) {
            return Err(Error::SelfIntersection(zeta));
        }
        let mut vertices = self.vertices.clone();
        vertices.push(zeta);
        Ok(Saw {
            vertices,
            origin_index: self.origin_index,
        })
    }

    /// The reversed walk `eta^R`.
    pub fn reverse(&self) -> Saw {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let origin_index = vertices.len() - 1 - self.origin_index;
        Saw {
            vertices,
            origin_index,
        }
    }

    /// Translates `eta_-` to the origin, producing `eta^o` in `W_{0, j+k}`.
    pub fn translate_to_origin(&self) -> Saw {
        let d = self.minus_end();
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.translate(-d.x, -d.y))
            .collect();
        Saw {
            vertices,
            origin_index: 0,
        }
    }

    /// `self` is a segment of `other` in the two-sided sense: both index
    /// ranges match vertexwise around the shared origin.
    pub fn is_prefix_of(&self, other: &Saw) -> bool {
        if self.backward_len() > other.backward_len()
            || self.forward_len() > other.forward_len()
        {
            return false;
        }
        let lo = -(self.backward_len() as isize);
        let hi = self.forward_len() as isize;
        (lo..=hi).all(|i| self.get(i) == other.get(i))
    }

    /// Applies a dihedral symmetry vertexwise.
    pub fn apply_symmetry(&self, g: Symmetry) -> Saw {
        Saw {
            vertices: self.vertices.iter().map(|&v| g.apply(v)).collect(),
            origin_index: self.origin_index,
        }
    }

    /// Rotates the walk so that its first forward step is to `1`, as the
    /// determinant formula requires.  Returns the rotated walk and the
    /// rotation used (the unique pure rotation with this property).
    pub fn canonicalize_first_step(&self) -> Result<(Saw, Symmetry)> {
        let first = self.get(1).ok_or(Error::NoForwardStep)?;
        // first is one of the four unit vectors; find r with i^r * first = 1.
        let mut p = first;
        for r in 0..4u8 {
            if p == Site::new(1, 0) {
                let g = Symmetry::rotation(r);
                return Ok((self.apply_symmetry(g), g));
            }
            p = p.rot90();
        }
        unreachable!("first step is always a unit vector");
    }

    /// All two-sided walks through the origin with at most `max_edges` edges,
    /// optionally restricted to vertices with `|v| < radius`.
    pub fn enumerate(max_edges: usize, radius: Option<f64>) -> Vec<Saw> {
        let fits = |s: Site| match radius {
            Some(r) => (s.abs2() as f64) < r * r,
            None => true,
        };
        let mut out = vec![Saw::trivial()];
        let mut frontier = vec![Saw::trivial()];
        for _ in 0..max_edges {
            let mut next = Vec::new();
            for saw in &frontier {
                // grow forward; growing backward is covered by also growing
                // the reversal, so enumerate extensions at both ends.
                for end in [false, true] {
                    let base = if end { saw.reverse() } else { saw.clone() };
                    for z in base.plus_end().neighbors() {
                        if !fits(z) || base.contains(z) {
                            continue;
                        }
                        let grown = base.concat_step(z).unwrap();
                        let grown = if end { grown.reverse() } else { grown };
                        if !next.contains(&grown) && !out.contains(&grown) {
                            next.push(grown);
                        }
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Reduces a set of walks modulo the eight lattice symmetries, keeping
    /// one representative per orbit (the lexicographically least image).
    pub fn symmetry_classes(saws: &[Saw]) -> Vec<Saw> {
        let mut reps: Vec<Saw> = Vec::new();
        let mut seen: std::collections::HashSet<Vec<Site>> = Default::default();
        for saw in saws {
            let canon = Symmetry::all()
                .iter()
                .map(|&g| saw.apply_symmetry(g).vertices.clone())
                .min()
                .unwrap();
            if seen.insert(canon) {
                reps.push(saw.clone());
            }
        }
        reps
    }
}

impl fmt::Display for Saw {
    /// The text format used by the CLI: `"(x,y);(x,y);..."`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.vertices {
            if !first {
                write!(f, ";")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Saw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Saw[{self}]")
    }
}

impl FromStr for Saw {
    type Err = Error;

    /// Parses the `"(x,y);(x,y);..."` format; the origin entry `(0,0)` must
    /// be present and fixes `origin_index`.
    fn from_str(s: &str) -> Result<Self> {
        let vertices = s
            .split(';')
            .map(|t| t.parse::<Site>())
            .collect::<Result<Vec<_>>>()?;
        Saw::from_vertices(vertices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn site(x: i64, y: i64) -> Site {
        Site::new(x, y)
    }

    fn saw(vs: &[(i64, i64)]) -> Saw {
        Saw::from_vertices(vs.iter().map(|&(x, y)| site(x, y)).collect()).unwrap()
    }

    #[test]
    fn concat_step_examples() {
        let grown = Saw::trivial().concat_step(site(1, 0)).unwrap();
        assert_eq!(grown, saw(&[(0, 0), (1, 0)]));

        let grown = saw(&[(0, 0), (1, 0)]).concat_step(site(2, 0)).unwrap();
        assert_eq!(grown, saw(&[(0, 0), (1, 0), (2, 0)]));

        assert_eq!(
            saw(&[(0, 0), (1, 0)]).concat_step(site(0, 0)),
            Err(Error::SelfIntersection(Site::ORIGIN))
        );
        assert!(matches!(
            saw(&[(0, 0), (1, 0)]).concat_step(site(3, 0)),
            Err(Error::NotNeighbor(..))
        ));
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(Saw::trivial().reverse(), Saw::trivial());

        let r = saw(&[(0, 0), (1, 0)]).reverse();
        assert_eq!(r.vertices(), &[site(1, 0), site(0, 0)]);
        assert_eq!(r.origin_index(), 1);

        let r = saw(&[(0, -1), (0, 0), (1, 0)]).reverse();
        assert_eq!(r.vertices(), &[site(1, 0), site(0, 0), site(0, -1)]);
    }

    #[test]
    fn translate_examples() {
        assert_eq!(
            saw(&[(0, 0), (1, 0)]).translate_to_origin(),
            saw(&[(0, 0), (1, 0)])
        );
        assert_eq!(
            saw(&[(-1, 0), (0, 0)]).translate_to_origin(),
            saw(&[(0, 0), (1, 0)])
        );
        // [-i, 0, 1] shifts by +i to [0, i, 1+i]
        let t = saw(&[(0, -1), (0, 0), (1, 0)]).translate_to_origin();
        assert_eq!(t.vertices(), &[site(0, 0), site(0, 1), site(1, 1)]);
        assert_eq!(t.origin_index(), 0);
    }

    #[test]
    fn prefix_examples() {
        let big = saw(&[(-1, 0), (0, 0), (1, 0), (1, 1)]);
        assert!(Saw::trivial().is_prefix_of(&big));
        assert!(saw(&[(0, 0), (1, 0)]).is_prefix_of(&big));
        assert!(!saw(&[(0, 0), (0, 1)]).is_prefix_of(&saw(&[(0, 0), (1, 0), (2, 0)])));
        // same vertex set, different side of the origin
        assert!(!saw(&[(1, 0), (0, 0)]).is_prefix_of(&saw(&[(0, 0), (1, 0)])));
    }

    #[test]
    fn canonicalize_examples() {
        let (c, g) = saw(&[(0, 0), (1, 0)]).canonicalize_first_step().unwrap();
        assert_eq!(g, Symmetry::IDENTITY);
        assert_eq!(c, saw(&[(0, 0), (1, 0)]));

        let (c, g) = saw(&[(0, 0), (0, 1)]).canonicalize_first_step().unwrap();
        assert_eq!(c, saw(&[(0, 0), (1, 0)]));
        assert_eq!(g, Symmetry::rotation(3));

        // [0, -1, -1+i] rotates by 180 degrees to [0, 1, 1-i]
        let (c, g) = saw(&[(0, 0), (-1, 0), (-1, 1)])
            .canonicalize_first_step()
            .unwrap();
        assert_eq!(c, saw(&[(0, 0), (1, 0), (1, -1)]));
        assert_eq!(g, Symmetry::rotation(2));

        assert_eq!(
            saw(&[(-1, 0), (0, 0)]).canonicalize_first_step(),
            Err(Error::NoForwardStep)
        );
    }

    #[test]
    fn parse_and_display_round_trip() {
        let s = "(-1,0);(0,0);(1,0);(1,1)";
        let w: Saw = s.parse().unwrap();
        assert_eq!(w.origin_index(), 1);
        assert_eq!(w.to_string(), s);
        assert!("(-1,0);(1,0)".parse::<Saw>().is_err()); // not neighbors
        assert!("(1,0);(2,0)".parse::<Saw>().is_err()); // origin missing
    }

    #[test]
    fn enumerate_counts() {
        // 4, 12, 36, 100 one-sided SAWs of lengths 1..4 and the two-sided
        // counts 8, 36, 144 for lengths 1..3.
        let all3 = Saw::enumerate(3, None);
        let count = |j: usize, k: usize| {
            all3.iter()
                .filter(|s| s.backward_len() == j && s.forward_len() == k)
                .count()
        };
        assert_eq!(count(0, 1) + count(1, 0), 8);
        assert_eq!(count(0, 2), 12);
        assert_eq!(count(1, 1), 12);
        assert_eq!(
            all3.iter().filter(|s| s.edge_count() == 3).count(),
            144
        );
    }

    fn arb_saw() -> impl Strategy<Value = Saw> {
        // grow a random SAW by rejecting blocked steps
        (proptest::collection::vec(0u8..4, 0..12), 0u8..4).prop_map(|(steps, _)| {
            let mut saw = Saw::trivial();
            for s in steps {
                let cand = saw.plus_end().neighbors()[s as usize];
                if let Ok(next) = saw.concat_step(cand) {
                    saw = next;
                }
            }
            // randomize the origin position by translating a vertex to 0
            saw
        })
    }

    proptest! {
        #[test]
        fn reverse_is_involution(saw in arb_saw()) {
            prop_assert_eq!(saw.reverse().reverse(), saw);
        }

        #[test]
        fn translate_is_idempotent(saw in arb_saw()) {
            let t = saw.translate_to_origin();
            prop_assert_eq!(t.translate_to_origin(), t);
        }

        #[test]
        fn concat_then_drop_recovers(saw in arb_saw()) {
            for z in saw.plus_end().neighbors() {
                if let Ok(grown) = saw.concat_step(z) {
                    let mut vs = grown.vertices().to_vec();
                    vs.pop();
                    prop_assert_eq!(Saw::new(vs, grown.origin_index()).unwrap(), saw.clone());
                }
            }
        }

        #[test]
        fn symmetry_round_trip(saw in arb_saw(), idx in 0usize..8) {
            let g = Symmetry::all()[idx];
            let image = saw.apply_symmetry(g);
            prop_assert!(Saw::new(image.vertices().to_vec(), image.origin_index()).is_ok());
            prop_assert_eq!(image.apply_symmetry(g.inverse()), saw);
        }

        #[test]
        fn symmetry_inverse_on_sites(x in -50i64..50, y in -50i64..50, idx in 0usize..8) {
            let g = Symmetry::all()[idx];
            let s = Site::new(x, y);
            prop_assert_eq!(g.inverse().apply(g.apply(s)), s);
        }
    }
}
