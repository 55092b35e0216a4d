//! Escape probabilities in the slit plane and the discrete square-root
//! harmonic functions built from them.
//!
//! `v(z)` is the limit of `R^(1/2) P^z[walk reaches radius R before the
//! non-negative real axis]`; it vanishes on `Z_+`, is harmonic off `Z_+`
//! for the standard Laplacian, and is harmonic off the origin for the
//! signed Laplacian.  Its discrete harmonic conjugate `u` is obtained by
//! reflecting across the imaginary axis and flipping the sign below the
//! real axis.  For a self-avoiding walk `eta` through the origin the slit
//! variants `v_eta`, `u_eta` subtract the signed-kernel correction so that
//! they vanish on `eta`; the strip variants are signed Poisson kernels of
//! the truncated strip to its two marked boundary points.

use crate::error::{Error, Result};
use crate::estimate::{extrapolate_dyadic, Estimate, ExtrapolationPolicy, Provenance};
use crate::lattice::{Saw, Site};
use crate::linops::FiniteDomain;
use crate::solve::SolverOptions;
use crate::weights::WeightField;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// `Im sqrt(z)` with the argument taken in `[0, 2*pi)`.
pub fn im_sqrt(z: Site) -> f64 {
    z.abs().sqrt() * (z.theta() / 2.0).sin()
}

/// `Re sqrt(z)` with the argument taken in `[0, 2*pi)`.
pub fn re_sqrt(z: Site) -> f64 {
    z.abs().sqrt() * (z.theta() / 2.0).cos()
}

/// A Dirichlet solve on the slit disk `D_R \ Z_+`, retaining enough context
/// to evaluate the solution (with its boundary data) at any site.
pub struct SlitDiskSolve {
    pub radius: f64,
    domain: FiniteDomain,
    values: Vec<f64>,
    data: fn(Site) -> f64,
}

fn escape_data(w: Site) -> f64 {
    if w.on_positive_axis() {
        0.0
    } else {
        1.0
    }
}

fn sin_half_data(w: Site) -> f64 {
    if w.on_positive_axis() {
        0.0
    } else {
        (w.theta() / 2.0).sin()
    }
}

fn im_sqrt_data(w: Site) -> f64 {
    if w.on_positive_axis() {
        0.0
    } else {
        im_sqrt(w)
    }
}

impl SlitDiskSolve {
    fn build(radius: f64, data: fn(Site) -> f64, opts: SolverOptions) -> Result<Self> {
        let domain = FiniteDomain::slit_disk(radius);
        let values = domain.solve_dirichlet(WeightField::Standard, data, opts)?;
        Ok(SlitDiskSolve {
            radius,
            domain,
            values,
            data,
        })
    }

    /// Solution value, extended by the boundary data outside the domain.
    pub fn value(&self, z: Site) -> f64 {
        match self.domain.index_of(z) {
            Some(i) => self.values[i],
            None => (self.data)(z),
        }
    }

    pub fn contains(&self, z: Site) -> bool {
        self.domain.contains(z)
    }
}

/// `P^z[sigma_R < tau_+]`: probability of reaching radius `R` before the
/// non-negative real axis.
pub fn escape_prob(z: Site, radius: f64, opts: SolverOptions) -> Result<f64> {
    if (z.abs2() as f64) >= radius * radius {
        return Err(Error::OutsideDomain(z));
    }
    Ok(SlitDiskSolve::build(radius, escape_data, opts)?.value(z))
}

/// Exact-rational escape probability for small radii.
pub fn escape_prob_rational(z: Site, radius: f64) -> Result<BigRational> {
    let domain = FiniteDomain::slit_disk(radius);
    if z.on_positive_axis() {
        return Ok(BigRational::zero());
    }
    let zi = domain.index_of(z).ok_or(Error::OutsideDomain(z))?;
    let sol = domain.solve_dirichlet_rational(WeightField::Standard, |w| {
        if w.on_positive_axis() {
            BigRational::zero()
        } else {
            BigRational::one()
        }
    })?;
    Ok(sol[zi].clone())
}

/// A table of slit-disk solves along a dyadic radius schedule, from which
/// `v` and `u` are extrapolated pointwise.
pub struct VTable {
    schedule: Vec<f64>,
    solves: Vec<SlitDiskSolve>,
    policy: ExtrapolationPolicy,
}

impl VTable {
    pub fn build(schedule: &[f64], opts: SolverOptions) -> Result<Self> {
        let solves = schedule
            .iter()
            .map(|&r| SlitDiskSolve::build(r, escape_data, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(VTable {
            schedule: schedule.to_vec(),
            solves,
            policy: ExtrapolationPolicy {
                beta: None,
                beta_fallback: 0.5,
                abs_floor: 1e-11,
            },
        })
    }

    pub fn schedule(&self) -> &[f64] {
        &self.schedule
    }

    /// `v(z)`: extrapolation of `R^(1/2) P^z[sigma_R < tau_+]`; exactly zero
    /// on the non-negative real axis.
    pub fn v(&self, z: Site) -> Result<Estimate> {
        if z.on_positive_axis() {
            return Ok(Estimate::exact(0.0));
        }
        let series: Vec<f64> = self
            .solves
            .iter()
            .map(|s| {
                if !s.contains(z) {
                    return Err(Error::OutsideDomain(z));
                }
                Ok(s.radius.sqrt() * s.value(z))
            })
            .collect::<Result<_>>()?;
        extrapolate_dyadic(&series, self.policy)
    }

    /// The discrete harmonic conjugate: reflect across the imaginary axis,
    /// flipping the sign below the real axis.
    pub fn u(&self, z: Site) -> Result<Estimate> {
        let reflected = Site::new(-z.x, z.y);
        let v = self.v(reflected)?;
        Ok(if z.y >= 0 { v } else { v.scale(-1.0) })
    }
}

/// Convenience wrapper: `v(z)` from a fresh table on the given schedule.
pub fn v(z: Site, schedule: &[f64], opts: SolverOptions) -> Result<Estimate> {
    VTable::build(schedule, opts)?.v(z)
}

/// `f_R(z) = E^z[f(S(sigma_R ^ tau_+))]` with `f = Im sqrt`: the harmonic
/// extension of the square root's imaginary part into the slit disk.
pub fn f_r(z: Site, radius: f64, opts: SolverOptions) -> Result<f64> {
    if (z.abs2() as f64) >= radius * radius {
        return Err(Error::OutsideDomain(z));
    }
    Ok(SlitDiskSolve::build(radius, im_sqrt_data, opts)?.value(z))
}

/// Conditional boundary expectation
/// `E^z[sin(theta/2) at exit | sigma_R < tau_+]`, which tends to `pi/4`.
pub fn pi_over_4_diagnostic(z: Site, radius: f64, opts: SolverOptions) -> Result<f64> {
    if (z.abs2() as f64) > radius.powf(1.5) {
        // the flat-conditional regime needs |z| <= R^(3/4)
        return Err(Error::OutsideDomain(z));
    }
    let escape = escape_prob(z, radius, opts)?;
    if escape == 0.0 {
        return Err(Error::DivideByZero("escape probability on the slit"));
    }
    let sin_solve = SlitDiskSolve::build(radius, sin_half_data, opts)?;
    Ok(sin_solve.value(z) / escape)
}

/// Signed Poisson kernel columns `H^q_{D_R \ eta}(., y)` for all `y` in
/// `eta`, at one radius.
struct SlitKernel {
    domain: FiniteDomain,
    columns: Vec<Vec<f64>>,
}

impl SlitKernel {
    fn build(eta: &Saw, radius: f64, opts: SolverOptions) -> Result<Self> {
        let domain = FiniteDomain::disk(radius).minus(eta.vertices());
        let columns = eta
            .vertices()
            .iter()
            .map(|&y| {
                domain.solve_dirichlet(WeightField::Zipper, |s| if s == y { 1.0 } else { 0.0 }, opts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SlitKernel { domain, columns })
    }

    fn kernel(&self, z: Site, y_index: usize, y: Site) -> f64 {
        match self.domain.index_of(z) {
            Some(zi) => self.columns[y_index][zi],
            None => {
                if z == y {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Which of the pair `v`, `u` a slit correction targets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Conjugate {
    V,
    U,
}

/// `v_eta(z) = v(z) - sum_{y in eta} H^q_{Z^2 \ eta}(z, y) v(y)` (or the
/// same with `u`), evaluated at several sites by exhausting the plane over
/// the given radii.  For `z` on the walk the value is exactly zero.
pub fn slit_corrected_many(
    which: Conjugate,
    eta: &Saw,
    zs: &[Site],
    radii: &[f64],
    table: &VTable,
    opts: SolverOptions,
) -> Result<Vec<Estimate>> {
    let base = |s: Site| match which {
        Conjugate::V => table.v(s),
        Conjugate::U => table.u(s),
    };
    let boundary_values: Vec<Estimate> = eta
        .vertices()
        .iter()
        .map(|&y| base(y))
        .collect::<Result<_>>()?;

    let mut per_radius: Vec<Vec<f64>> = Vec::with_capacity(radii.len());
    for &r in radii {
        let kernel = SlitKernel::build(eta, r, opts)?;
        let row = zs
            .iter()
            .map(|&z| {
                let mut corr = 0.0;
                for (yi, &y) in eta.vertices().iter().enumerate() {
                    corr += kernel.kernel(z, yi, y) * boundary_values[yi].value;
                }
                corr
            })
            .collect();
        per_radius.push(row);
    }

    zs.iter()
        .enumerate()
        .map(|(i, &z)| {
            if eta.contains(z) {
                return Ok(Estimate::exact(0.0));
            }
            let vz = base(z)?;
            let series: Vec<f64> = per_radius.iter().map(|row| row[i]).collect();
            let corr = extrapolate_dyadic(
                &series,
                ExtrapolationPolicy {
                    beta: None,
                    beta_fallback: 0.5,
                    abs_floor: 1e-11,
                },
            )?;
            // propagate the errors of the table values through the sum
            let data_err: f64 = boundary_values.iter().map(|b| b.error).sum();
            Ok(Estimate {
                value: vz.value - corr.value,
                error: vz.error + corr.error + data_err,
                mode: Provenance::Extrapolated,
            })
        })
        .collect()
}

/// Truncation height for the strip `{|x| < n}`: the cap mass decays like
/// the strip's first Fourier mode, so eight widths suffice.
pub fn strip_cap(n: i64, eta: &Saw) -> i64 {
    (8 * n).max(8 * eta.max_abs().ceil() as i64)
}

/// Which marked strip boundary point a kernel targets: `-n` for the
/// `v`-like kernel, `+n` for the `u`-like one.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StripSide {
    Minus,
    Plus,
}

/// One signed Poisson kernel `H^q_{A_n \ eta}(., +-n)` on the truncated
/// strip, with the cap-truncation error bound.
pub struct StripKernel {
    pub n: i64,
    pub cap: i64,
    pub target: Site,
    domain: FiniteDomain,
    values: Vec<f64>,
}

impl StripKernel {
    pub fn build(n: i64, eta: &Saw, side: StripSide, opts: SolverOptions) -> Result<Self> {
        let cap = strip_cap(n, eta);
        let target = match side {
            StripSide::Minus => Site::new(-n, 0),
            StripSide::Plus => Site::new(n, 0),
        };
        for &v in eta.vertices() {
            if v.x.abs() >= n || v.y.abs() > cap {
                return Err(Error::OutsideDomain(v));
            }
        }
        let domain = FiniteDomain::strip(n, cap).minus(eta.vertices());
        let values = domain.solve_dirichlet(
            WeightField::Zipper,
            |s| if s == target { 1.0 } else { 0.0 },
            opts,
        )?;
        Ok(StripKernel {
            n,
            cap,
            target,
            domain,
            values,
        })
    }

    /// Kernel value; zero on the walk and on all unmarked boundary.
    pub fn value(&self, z: Site) -> f64 {
        match self.domain.index_of(z) {
            Some(i) => self.values[i],
            None => {
                if z == self.target {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper bound on the neglected cap mass as seen from `z`.
    pub fn cap_error(&self, z: Site) -> f64 {
        let vmax = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dist = (self.cap - z.y.abs()).max(0) as f64;
        2.0 * (-PI * dist / (2.0 * self.n as f64)).exp() * vmax
    }
}

/// `v_eta^{(n)}(z) = H^q_{A_n \ eta}(z, -n)` on the truncated strip.
pub fn v_eta_strip(n: i64, eta: &Saw, z: Site, opts: SolverOptions) -> Result<Estimate> {
    let kernel = StripKernel::build(n, eta, StripSide::Minus, opts)?;
    Ok(Estimate {
        value: kernel.value(z),
        error: kernel.cap_error(z),
        mode: Provenance::Extrapolated,
    })
}

/// `u_eta^{(n)}(z) = H^q_{A_n \ eta}(z, +n)` on the truncated strip.
pub fn u_eta_strip(n: i64, eta: &Saw, z: Site, opts: SolverOptions) -> Result<Estimate> {
    let kernel = StripKernel::build(n, eta, StripSide::Plus, opts)?;
    Ok(Estimate {
        value: kernel.value(z),
        error: kernel.cap_error(z),
        mode: Provenance::Extrapolated,
    })
}

/// Which harmonic function a table holds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TableKind {
    V,
    U,
}

/// A window of extrapolated `v`/`u` values, as emitted by the CLI.
pub struct HarmonicTable {
    pub kind: TableKind,
    pub entries: BTreeMap<Site, Estimate>,
}

impl HarmonicTable {
    /// Tabulates `v` or `u` over the square window `|x|, |y| <= half_width`.
    pub fn build(
        kind: TableKind,
        half_width: i64,
        schedule: &[f64],
        opts: SolverOptions,
    ) -> Result<Self> {
        let table = VTable::build(schedule, opts)?;
        let mut entries = BTreeMap::new();
        for y in -half_width..=half_width {
            for x in -half_width..=half_width {
                let z = Site::new(x, y);
                let est = match kind {
                    TableKind::V => table.v(z)?,
                    TableKind::U => table.u(z)?,
                };
                entries.insert(z, est);
            }
        }
        Ok(HarmonicTable { kind, entries })
    }

    /// CSV with columns `x, y, value, error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,value,error\n");
        for (z, e) in &self.entries {
            out.push_str(&format!(
                "{},{},{:.12e},{:.3e}\n",
                z.x, z.y, e.value, e.error
            ));
        }
        out
    }
}
