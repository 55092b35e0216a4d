//! Finite lattice domains and the kernels computed on them: discrete
//! Laplacians, Green's functions, Poisson kernels (interior and boundary),
//! and the loop term appearing in the product formula for path weights.
//!
//! A [`FiniteDomain`] is an explicit finite set of interior sites; its
//! boundary is derived as the set of outside neighbors.  Linear systems are
//! `(I - Q) x = b` with `Q` the (possibly signed) edge-weight matrix
//! restricted to the interior; they are solved either in floating point
//! (preconditioned conjugate gradients) or exactly over the rationals.

pub mod walksum;

use crate::error::{Error, Result};
use crate::estimate::{extrapolate_dyadic, Estimate, ExtrapolationPolicy};
use crate::lattice::{Saw, Site};
use crate::solve::{cg_solve, solve_integer_system, Csr, SolverOptions};
use crate::weights::WeightField;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use crate::fxhash::FxHashMap;
use std::collections::BTreeSet;

/// An explicit finite subset of `Z^2` with derived boundary and a fixed
/// site indexing.
#[derive(Clone)]
pub struct FiniteDomain {
    sites: Vec<Site>,
    index: FxHashMap<Site, u32>,
    boundary: Vec<Site>,
}

impl FiniteDomain {
    pub fn from_sites(sites: Vec<Site>) -> Self {
        let mut index = FxHashMap::with_capacity_and_hasher(sites.len(), Default::default());
        for (i, &s) in sites.iter().enumerate() {
            let prev = index.insert(s, i as u32);
            assert!(prev.is_none(), "duplicate site {s}");
        }
        let mut boundary = BTreeSet::new();
        for &s in &sites {
            for w in s.neighbors() {
                if !index.contains_key(&w) {
                    boundary.insert(w);
                }
            }
        }
        FiniteDomain {
            sites,
            index,
            boundary: boundary.into_iter().collect(),
        }
    }

    /// Discrete disk `D_R = {|z| < R}`.
    pub fn disk(radius: f64) -> Self {
        let r = radius.ceil() as i64;
        let r2 = radius * radius;
        let mut sites = Vec::new();
        for y in -r..=r {
            for x in -r..=r {
                if ((x * x + y * y) as f64) < r2 {
                    sites.push(Site::new(x, y));
                }
            }
        }
        FiniteDomain::from_sites(sites)
    }

    /// Slit disk `D_R \ Z_+`: the disk with the non-negative real axis
    /// removed.
    pub fn slit_disk(radius: f64) -> Self {
        let r = radius.ceil() as i64;
        let r2 = radius * radius;
        let mut sites = Vec::new();
        for y in -r..=r {
            for x in -r..=r {
                if ((x * x + y * y) as f64) < r2 && !(y == 0 && x >= 0) {
                    sites.push(Site::new(x, y));
                }
            }
        }
        FiniteDomain::from_sites(sites)
    }

    /// Discrete square `U_R = {|x| < R, |y| < R}`.
    pub fn square(r: i64) -> Self {
        let mut sites = Vec::new();
        for y in -r + 1..r {
            for x in -r + 1..r {
                sites.push(Site::new(x, y));
            }
        }
        FiniteDomain::from_sites(sites)
    }

    /// Slit square `U_R^- = U_R \ [0, R)` (non-negative real axis removed).
    pub fn slit_square(r: i64) -> Self {
        let mut sites = Vec::new();
        for y in -r + 1..r {
            for x in -r + 1..r {
                if !(y == 0 && x >= 0) {
                    sites.push(Site::new(x, y));
                }
            }
        }
        FiniteDomain::from_sites(sites)
    }

    /// Vertical truncation of the infinite strip `{|x| < n}` at
    /// `|y| <= height_cap`.  The caps become zero-data boundary; callers
    /// account for the neglected mass in their error fields.
    pub fn strip(n: i64, height_cap: i64) -> Self {
        let mut sites = Vec::with_capacity(((2 * n - 1) * (2 * height_cap + 1)) as usize);
        for y in -height_cap..=height_cap {
            for x in -n + 1..n {
                sites.push(Site::new(x, y));
            }
        }
        FiniteDomain::from_sites(sites)
    }

    /// The domain with the given sites removed (they join the boundary).
    pub fn minus(&self, remove: &[Site]) -> Self {
        let removed: std::collections::HashSet<Site> = remove.iter().copied().collect();
        FiniteDomain::from_sites(
            self.sites
                .iter()
                .copied()
                .filter(|s| !removed.contains(s))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn boundary(&self) -> &[Site] {
        &self.boundary
    }

    pub fn contains(&self, s: Site) -> bool {
        self.index.contains_key(&s)
    }

    pub fn index_of(&self, s: Site) -> Option<usize> {
        self.index.get(&s).map(|&i| i as usize)
    }

    pub fn is_boundary(&self, s: Site) -> bool {
        !self.contains(s) && s.neighbors().iter().any(|w| self.contains(*w))
    }

    /// Assembles `I - Q` for the given field (unit diagonal held implicitly).
    pub fn assemble(&self, field: WeightField) -> Csr {
        let n = self.sites.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(4 * n);
        let mut values = Vec::with_capacity(4 * n);
        indptr.push(0u32);
        for &z in &self.sites {
            for w in z.neighbors() {
                if let Some(&j) = self.index.get(&w) {
                    indices.push(j);
                    values.push(-field.weight_f64(z, w));
                }
            }
            indptr.push(indices.len() as u32);
        }
        Csr {
            n,
            indptr,
            indices,
            values,
        }
    }

    /// Solves `(I - Q) x = rhs`.
    pub fn solve_rhs(&self, field: WeightField, rhs: &[f64], opts: SolverOptions) -> Result<Vec<f64>> {
        cg_solve(&self.assemble(field), rhs, opts)
    }

    /// Right-hand side of the Dirichlet problem with the given boundary
    /// data: `rhs[z] = sum_{w outside, w ~ z} weight(z, w) * data(w)`.
    pub fn dirichlet_rhs(&self, field: WeightField, data: impl Fn(Site) -> f64) -> Vec<f64> {
        self.sites
            .iter()
            .map(|&z| {
                let mut acc = 0.0;
                for w in z.neighbors() {
                    if !self.index.contains_key(&w) {
                        let d = data(w);
                        if d != 0.0 {
                            acc += field.weight_f64(z, w) * d;
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// Solves the Dirichlet problem `L^q h = 0` inside, `h = data` outside.
    pub fn solve_dirichlet(
        &self,
        field: WeightField,
        data: impl Fn(Site) -> f64,
        opts: SolverOptions,
    ) -> Result<Vec<f64>> {
        let rhs = self.dirichlet_rhs(field, &data);
        self.solve_rhs(field, &rhs, opts)
    }

    /// The integer matrix `4 (I - Q)` used by the exact-rational solver.
    fn integer_matrix(&self, field: WeightField) -> Vec<Vec<BigInt>> {
        let n = self.sites.len();
        let mut a = vec![vec![BigInt::zero(); n]; n];
        for (i, &z) in self.sites.iter().enumerate() {
            a[i][i] = BigInt::from(4);
            for w in z.neighbors() {
                if let Some(&j) = self.index.get(&w) {
                    a[i][j as usize] = BigInt::from(-(field.edge_sign(z, w) as i64));
                }
            }
        }
        a
    }

    /// Exact solve of `(I - Q) X = RHS` for several rational right-hand
    /// sides.
    pub fn solve_rhs_rational(
        &self,
        field: WeightField,
        rhs_cols: &[Vec<BigRational>],
    ) -> Result<Vec<Vec<BigRational>>> {
        let n = self.sites.len();
        // scale system by 4 and clear rhs denominators per column
        let a = self.integer_matrix(field);
        let mut int_cols = Vec::with_capacity(rhs_cols.len());
        let mut scales = Vec::with_capacity(rhs_cols.len());
        for col in rhs_cols {
            assert_eq!(col.len(), n);
            let mut lcm = BigInt::from(1);
            for v in col {
                lcm = num_integer::lcm(lcm, v.denom().clone());
            }
            let ints: Vec<BigInt> = col
                .iter()
                .map(|v| {
                    let scaled = v * BigRational::from(BigInt::from(4) * &lcm);
                    debug_assert!(scaled.is_integer());
                    scaled.to_integer()
                })
                .collect();
            int_cols.push(ints);
            scales.push(lcm);
        }
        let sols = solve_integer_system(a, int_cols)?;
        Ok(sols
            .into_iter()
            .zip(scales)
            .map(|(col, s)| {
                let s = BigRational::from(s);
                col.into_iter().map(|v| v / &s).collect()
            })
            .collect())
    }

    /// Exact Dirichlet solve with rational boundary data.
    pub fn solve_dirichlet_rational(
        &self,
        field: WeightField,
        data: impl Fn(Site) -> BigRational,
    ) -> Result<Vec<BigRational>> {
        let rhs: Vec<BigRational> = self
            .sites
            .iter()
            .map(|&z| {
                let mut acc = BigRational::zero();
                for w in z.neighbors() {
                    if !self.index.contains_key(&w) {
                        let weight = BigRational::new(
                            BigInt::from(field.edge_sign(z, w) as i64),
                            BigInt::from(4),
                        );
                        acc += weight * data(w);
                    }
                }
                acc
            })
            .collect();
        Ok(self.solve_rhs_rational(field, &[rhs])?.pop().unwrap())
    }
}

/// `L f(z) = sum_w weight(z,w) f(w) - f(z)` over the four neighbors.
pub fn laplacian_apply(field: WeightField, f: impl Fn(Site) -> f64, z: Site) -> f64 {
    let mut acc = -f(z);
    for w in z.neighbors() {
        acc += field.weight_f64(z, w) * f(w);
    }
    acc
}

/// Exact-rational Laplacian, for oracle checks.
pub fn laplacian_apply_rational(
    field: WeightField,
    f: impl Fn(Site) -> BigRational,
    z: Site,
) -> BigRational {
    let mut acc = -f(z);
    for w in z.neighbors() {
        let weight = BigRational::new(BigInt::from(field.edge_sign(z, w) as i64), BigInt::from(4));
        acc += weight * f(w);
    }
    acc
}

/// One column `G_A(., w)` of the Green's function.
pub fn green_column(
    domain: &FiniteDomain,
    field: WeightField,
    w: Site,
    opts: SolverOptions,
) -> Result<Vec<f64>> {
    let wi = domain.index_of(w).ok_or(Error::OutsideDomain(w))?;
    let mut rhs = vec![0.0; domain.len()];
    rhs[wi] = 1.0;
    domain.solve_rhs(field, &rhs, opts)
}

/// `G_A(z, w)`: the expected signed number of visits to `w` by a walk from
/// `z` killed on leaving `A`.
pub fn green(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    w: Site,
    opts: SolverOptions,
) -> Result<f64> {
    let zi = domain.index_of(z).ok_or(Error::OutsideDomain(z))?;
    Ok(green_column(domain, field, w, opts)?[zi])
}

/// Exact-rational `G_A(z, w)`.
pub fn green_rational(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    w: Site,
) -> Result<BigRational> {
    let zi = domain.index_of(z).ok_or(Error::OutsideDomain(z))?;
    let wi = domain.index_of(w).ok_or(Error::OutsideDomain(w))?;
    let mut rhs = vec![BigRational::zero(); domain.len()];
    rhs[wi] = BigRational::from(BigInt::from(1));
    Ok(domain.solve_rhs_rational(field, &[rhs])?[0][zi].clone())
}

/// Poisson kernel `H_A(z, w)` for a boundary site `w`; for `z` outside the
/// domain this is the Dirac mass `1_w(z)`.
pub fn poisson(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    w: Site,
    opts: SolverOptions,
) -> Result<f64> {
    if !domain.is_boundary(w) {
        return Err(Error::OutsideDomain(w));
    }
    match domain.index_of(z) {
        None => Ok(if z == w { 1.0 } else { 0.0 }),
        Some(zi) => {
            let sol = domain.solve_dirichlet(field, |s| if s == w { 1.0 } else { 0.0 }, opts)?;
            Ok(sol[zi])
        }
    }
}

/// Exact-rational Poisson kernel.
pub fn poisson_rational(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    w: Site,
) -> Result<BigRational> {
    if !domain.is_boundary(w) {
        return Err(Error::OutsideDomain(w));
    }
    let one = BigRational::from(BigInt::from(1));
    match domain.index_of(z) {
        None => Ok(if z == w { one } else { BigRational::zero() }),
        Some(zi) => {
            let sol = domain.solve_dirichlet_rational(field, |s| {
                if s == w {
                    one.clone()
                } else {
                    BigRational::zero()
                }
            })?;
            Ok(sol[zi].clone())
        }
    }
}

/// Full exit distribution `w -> H_A(z, w)` from one interior solve, using
/// the symmetry of `I - Q`.
pub fn poisson_exit_distribution(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    opts: SolverOptions,
) -> Result<Vec<(Site, f64)>> {
    let g = green_column(domain, field, z, opts)?;
    let mut out = Vec::with_capacity(domain.boundary().len());
    for &w in domain.boundary() {
        let mut acc = 0.0;
        for y in w.neighbors() {
            if let Some(yi) = domain.index_of(y) {
                acc += g[yi] * field.weight_f64(y, w);
            }
        }
        out.push((w, acc));
    }
    Ok(out)
}

/// Boundary Poisson kernel `H_{dA}(z, w) = L_z H_A(z, w)` for distinct
/// boundary sites: the weight of walks from `z` to `w` whose interior lies
/// in `A` (including a direct edge when `z ~ w`).
pub fn boundary_poisson(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    w: Site,
    opts: SolverOptions,
) -> Result<f64> {
    if z == w {
        return Err(Error::Parse("boundary Poisson kernel needs z != w".into()));
    }
    if !domain.is_boundary(z) || !domain.is_boundary(w) {
        return Err(Error::OutsideDomain(if domain.is_boundary(z) { w } else { z }));
    }
    let sol = domain.solve_dirichlet(field, |s| if s == w { 1.0 } else { 0.0 }, opts)?;
    let value_at = |s: Site| -> f64 {
        match domain.index_of(s) {
            Some(i) => sol[i],
            None => {
                if s == w {
                    1.0
                } else {
                    0.0
                }
            }
        }
    };
    // H_A(z, w) = 0 since z is a boundary site distinct from w
    let mut acc = 0.0;
    for x in z.neighbors() {
        acc += field.weight_f64(z, x) * value_at(x);
    }
    Ok(acc)
}

/// Exact-rational boundary Poisson kernel.
pub fn boundary_poisson_rational(
    domain: &FiniteDomain,
    field: WeightField,
    z: Site,
    w: Site,
) -> Result<BigRational> {
    if z == w {
        return Err(Error::Parse("boundary Poisson kernel needs z != w".into()));
    }
    if !domain.is_boundary(z) || !domain.is_boundary(w) {
        return Err(Error::OutsideDomain(if domain.is_boundary(z) { w } else { z }));
    }
    let one = BigRational::from(BigInt::from(1));
    let sol = domain.solve_dirichlet_rational(field, |s| {
        if s == w {
            one.clone()
        } else {
            BigRational::zero()
        }
    })?;
    let value_at = |s: Site| -> BigRational {
        match domain.index_of(s) {
            Some(i) => sol[i].clone(),
            None => {
                if s == w {
                    one.clone()
                } else {
                    BigRational::zero()
                }
            }
        }
    };
    let mut acc = BigRational::zero();
    for x in z.neighbors() {
        let weight = BigRational::new(BigInt::from(field.edge_sign(z, x) as i64), BigInt::from(4));
        acc += weight * value_at(x);
    }
    Ok(acc)
}

/// Slit-plane Green's function diagonal `G_{Z^2 \ eta}(zeta, zeta)` by
/// exhaustion over disks of the given radii.
///
/// For the signed field the truncation error decays like `1/R` (an escaping
/// walk must also return, squaring the square-root cancellation), which the
/// validated Richardson ladder removes; a series that rejects that model is
/// accelerated with a fitted exponent instead.
pub fn green_diag_slit_plane(
    eta: &Saw,
    field: WeightField,
    zeta: Site,
    radii: &[f64],
    opts: SolverOptions,
) -> Result<Estimate> {
    let values = green_diag_slit_plane_values(eta, field, zeta, radii, opts)?;
    crate::estimate::ladder_extrapolate(&values, 1e-12)
}

/// The finite-radius values `G_{D_R \ eta}(zeta, zeta)` along the schedule.
pub fn green_diag_slit_plane_values(
    eta: &Saw,
    field: WeightField,
    zeta: Site,
    radii: &[f64],
    opts: SolverOptions,
) -> Result<Vec<f64>> {
    if eta.contains(zeta) {
        return Err(Error::SelfIntersection(zeta));
    }
    radii
        .iter()
        .map(|&r| {
            let domain = FiniteDomain::disk(r).minus(eta.vertices());
            green(&domain, field, zeta, zeta, opts)
        })
        .collect()
}

/// Loop term `prod_j G_{A_j}(x_j, x_j)` over the given vertices in list
/// order, where `A_j` removes the previously listed vertices; exact mode.
/// For the path-weight identity the head of the list is the walk's first
/// vertex (the origin after translation).
pub fn loop_term_rational(domain: &FiniteDomain, vertices: &[Site]) -> Result<BigRational> {
    for &v in vertices {
        if !domain.contains(v) {
            return Err(Error::OutsideDomain(v));
        }
    }
    let mut acc = BigRational::from(BigInt::from(1));
    for j in 1..vertices.len() {
        let sub = domain.minus(&vertices[..j]);
        acc *= green_rational(&sub, WeightField::Standard, vertices[j], vertices[j])?;
    }
    Ok(acc)
}

/// Floating-point loop term on a fixed ambient domain.
pub fn loop_term_f64(domain: &FiniteDomain, vertices: &[Site], opts: SolverOptions) -> Result<f64> {
    for &v in vertices {
        if !domain.contains(v) {
            return Err(Error::OutsideDomain(v));
        }
    }
    let mut acc = 1.0;
    for j in 1..vertices.len() {
        let sub = domain.minus(&vertices[..j]);
        acc *= green(&sub, WeightField::Standard, vertices[j], vertices[j], opts)?;
    }
    Ok(acc)
}

/// Determinant form `det [G_{A \ {x_0}}(x_i, x_j)]_{i,j>=1}` of the loop
/// term, kept as an algebraically independent route for cross-checks.
pub fn loop_term_det_rational(domain: &FiniteDomain, vertices: &[Site]) -> Result<BigRational> {
    let verts = vertices;
    let punctured = domain.minus(&verts[..1]);
    let inner = &verts[1..];
    let mut cols = Vec::with_capacity(inner.len());
    for &w in inner {
        let wi = punctured.index_of(w).ok_or(Error::OutsideDomain(w))?;
        let mut rhs = vec![BigRational::zero(); punctured.len()];
        rhs[wi] = BigRational::from(BigInt::from(1));
        cols.push(rhs);
    }
    let sols = punctured.solve_rhs_rational(WeightField::Standard, &cols)?;
    let mat: Vec<Vec<BigRational>> = inner
        .iter()
        .map(|&z| {
            let zi = punctured.index_of(z).unwrap();
            sols.iter().map(|col| col[zi].clone()).collect()
        })
        .collect();
    Ok(crate::solve::det_rational(mat))
}

/// Infinite-volume loop term by exhaustion: the finite product is evaluated
/// on each disk of the schedule and the products are extrapolated.
pub fn loop_term_slit_plane(
    vertices: &[Site],
    radii: &[f64],
    opts: SolverOptions,
) -> Result<Estimate> {
    let products = radii
        .iter()
        .map(|&r| loop_term_f64(&FiniteDomain::disk(r), vertices, opts))
        .collect::<Result<Vec<f64>>>()?;
    extrapolate_dyadic(&products, ExtrapolationPolicy::default())
}

/// A computed table of kernel values, dumpable as CSV for debugging.
pub struct Kernel {
    pub entries: Vec<(Site, Site, f64)>,
}

impl Kernel {
    /// Green's function columns `G_A(., w)` for the given sources.
    pub fn green_columns(
        domain: &FiniteDomain,
        field: WeightField,
        sources: &[Site],
        opts: SolverOptions,
    ) -> Result<Kernel> {
        let mut entries = Vec::new();
        for &w in sources {
            let col = green_column(domain, field, w, opts)?;
            for (i, &z) in domain.sites().iter().enumerate() {
                entries.push((z, w, col[i]));
            }
        }
        Ok(Kernel { entries })
    }

    /// CSV with columns `z.x, z.y, w.x, w.y, value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z.x,z.y,w.x,w.y,value\n");
        for &(z, w, v) in &self.entries {
            out.push_str(&format!("{},{},{},{},{v:.17e}\n", z.x, z.y, w.x, w.y));
        }
        out
    }
}

/// Magnitude of the largest entry of the smaller of two rationals' difference
/// helper for exact comparisons in tests.
pub fn rational_abs_diff(a: &BigRational, b: &BigRational) -> BigRational {
    (a - b).abs()
}

#[cfg(test)]
mod tests;
