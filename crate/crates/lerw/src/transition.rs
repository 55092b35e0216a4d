//! Transition probabilities of the two-sided walk, by both routes.
//!
//! Determinant route: the probability of extending `eta` by a neighbor
//! `zeta` of its forward tip is
//! `1/4 * G^q_{Z^2 \ eta}(zeta, zeta) * |D^q(eta^zeta) / D^q(eta)|`,
//! where `D^q` is the 2x2 determinant of the signed Laplacians of the slit
//! square-root functions at the walk's two tips.  The determinants are
//! evaluated on truncated strips (the strip normalization cancels in every
//! ratio) or, as a cross-check, from the plane-exhausted slit corrections.
//!
//! Sampling route: path weights factor into `(2d)^(-len)` times the loop
//! term times the two-walk escape ratio `phi`, with the Monte Carlo module
//! supplying `phi`.
//!
//! An [`Engine`] carries the numeric configuration and memoizes strip
//! determinants and Green's-function diagonals across chained evaluations.

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Provenance};
use crate::harmonic::{self, Conjugate, StripKernel, StripSide, VTable};
use crate::lattice::{Saw, Site};
use crate::linops::{self, laplacian_apply, FiniteDomain};
use crate::montecarlo;
use crate::solve::SolverOptions;
use crate::weights::WeightField;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

/// Which formula produced a transition probability.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Route {
    Determinant,
    GreenPhi,
}

/// A transition probability with the factors that produced it; the
/// components multiply to the probability value.
#[derive(Clone, Debug, Serialize)]
pub struct TransitionResult {
    pub probability: Estimate,
    pub route: Route,
    pub components: BTreeMap<String, f64>,
}

/// How the tip determinants are evaluated.
#[derive(Clone, Debug)]
pub enum DqMode {
    /// Strip kernels at the given widths; ratios are extrapolated across
    /// the schedule when it has more than one entry.
    Strip(Vec<i64>),
    /// Plane-exhausted slit corrections over the given radii (cross-check
    /// route; considerably more expensive).
    Infinite(Vec<f64>),
}

/// Numeric configuration for an [`Engine`].
#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Strip widths (or radii) for the determinant factors.
    pub dq_mode: DqMode,
    /// Disk radii for the signed Green's-function diagonal.
    pub gq_radii: Vec<f64>,
    /// Disk radii for the matched-domain sampling route.
    pub phi_radii: Vec<f64>,
    /// Raw samples per Monte Carlo estimate.
    pub mc_samples: u64,
    /// Minimum accepted samples before an estimate is trusted.
    pub mc_min_accepted: u64,
    pub seed: u64,
    pub opts: SolverOptions,
    /// Determinant degeneracy threshold, relative to the entry scale.
    pub degenerate_tol: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            dq_mode: DqMode::Strip(vec![16, 32, 64]),
            gq_radii: vec![32.0, 64.0, 128.0],
            phi_radii: vec![16.0, 32.0, 64.0],
            mc_samples: 400_000,
            mc_min_accepted: 2_000,
            seed: 1,
            opts: SolverOptions::default(),
            degenerate_tol: 1e-10,
        }
    }
}

/// Transition evaluator: configuration plus caches shared across chained
/// evaluations (strip determinants, Green's diagonals, escape baselines).
pub struct Engine {
    pub config: EngineConfig,
    dq_cache: Mutex<HashMap<(Vec<Site>, i64), DqValue>>,
    gq_cache: Mutex<HashMap<(Vec<Site>, Site), Estimate>>,
    v_table: Mutex<Option<std::sync::Arc<VTable>>>,
    phi_baseline_cache: Mutex<HashMap<u64, montecarlo::McEstimate>>,
}

#[derive(Clone, Copy, Debug)]
struct DqValue {
    det: f64,
    entry_scale: f64,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(EngineConfig::default())
    }
}

/// Stable hash of a walk, used to decorrelate Monte Carlo streams between
/// different walks under one seed.
fn saw_hash(eta: &Saw) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for v in eta.vertices() {
        for c in [v.x, v.y] {
            h ^= c as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Engine {
            config,
            dq_cache: Mutex::new(HashMap::new()),
            gq_cache: Mutex::new(HashMap::new()),
            v_table: Mutex::new(None),
            phi_baseline_cache: Mutex::new(HashMap::new()),
        }
    }

    fn shared_v_table(&self) -> Result<std::sync::Arc<VTable>> {
        let mut guard = self.v_table.lock().unwrap();
        if guard.is_none() {
            let radii: Vec<f64> = self.config.gq_radii.clone();
            *guard = Some(std::sync::Arc::new(VTable::build(&radii, self.config.opts)?));
        }
        Ok(guard.as_ref().unwrap().clone())
    }

    /// Signed Green's-function diagonal `G^q_{Z^2 \ eta}(zeta, zeta)`,
    /// memoized on the canonical walk.
    fn gq_diag(&self, eta: &Saw, zeta: Site) -> Result<Estimate> {
        let key = (eta.vertices().to_vec(), zeta);
        if let Some(hit) = self.gq_cache.lock().unwrap().get(&key) {
            return Ok(*hit);
        }
        let est =
            linops::green_diag_slit_plane(eta, WeightField::Zipper, zeta, &self.config.gq_radii, self.config.opts)?;
        self.gq_cache.lock().unwrap().insert(key, est);
        Ok(est)
    }

    /// `D^q` at one strip width, memoized.  The walk must have its first
    /// forward step at `1`.
    fn dq_at_strip(&self, eta: &Saw, n: i64) -> Result<DqValue> {
        debug_assert_eq!(eta.get(1), Some(Site::new(1, 0)));
        let key = (eta.vertices().to_vec(), n);
        if let Some(hit) = self.dq_cache.lock().unwrap().get(&key) {
            return Ok(*hit);
        }
        let v_kernel = StripKernel::build(n, eta, StripSide::Minus, self.config.opts)?;
        let u_kernel = StripKernel::build(n, eta, StripSide::Plus, self.config.opts)?;
        let tips = [eta.minus_end(), eta.plus_end()];
        let mut entries = [[0.0f64; 2]; 2];
        for (col, &tip) in tips.iter().enumerate() {
            entries[0][col] = laplacian_apply(WeightField::Zipper, |s| v_kernel.value(s), tip);
            entries[1][col] = laplacian_apply(WeightField::Zipper, |s| u_kernel.value(s), tip);
        }
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        let entry_scale = entries
            .iter()
            .flatten()
            .fold(0.0f64, |m, e| m.max(e.abs()));
        let value = DqValue { det, entry_scale };
        self.dq_cache.lock().unwrap().insert(key, value);
        Ok(value)
    }

    /// `|D^q(next) / D^q(base)|` along the strip schedule, extrapolated.
    fn dq_ratio_strip(&self, next: &Saw, base: &Saw, ns: &[i64]) -> Result<Estimate> {
        let mut ratios = Vec::with_capacity(ns.len());
        for &n in ns {
            let num = self.dq_at_strip(next, n)?;
            let den = self.dq_at_strip(base, n)?;
            let floor = self.config.degenerate_tol * den.entry_scale * den.entry_scale;
            if den.det.abs() <= floor {
                return Err(Error::DegenerateDeterminant(den.det));
            }
            ratios.push((num.det / den.det).abs());
        }
        // the normalized strip determinants behave like L + a/n + b/n^2, so
        // their ratios do too; the ladder removes both orders when the data
        // confirm the model
        crate::estimate::ladder_extrapolate(&ratios, 1e-10)
    }

    /// `|D^q(next) / D^q(base)|` from plane-exhausted slit corrections.
    fn dq_ratio_infinite(&self, next: &Saw, base: &Saw, radii: &[f64]) -> Result<Estimate> {
        let table = self.shared_v_table()?;
        let dq = |eta: &Saw| -> Result<(f64, f64)> {
            let tips = [eta.minus_end(), eta.plus_end()];
            let mut entries = [[Estimate::exact(0.0); 2]; 2];
            for (row, which) in [(0usize, Conjugate::V), (1, Conjugate::U)] {
                // sites needed by the tip Laplacians
                let mut zs: Vec<Site> = Vec::new();
                for &tip in &tips {
                    for w in tip.neighbors() {
                        if !zs.contains(&w) {
                            zs.push(w);
                        }
                    }
                }
                let vals =
                    harmonic::slit_corrected_many(which, eta, &zs, radii, &table, self.config.opts)?;
                let lookup = |s: Site| -> Estimate {
                    match zs.iter().position(|&z| z == s) {
                        Some(i) => vals[i],
                        None => Estimate::exact(0.0),
                    }
                };
                for (col, &tip) in tips.iter().enumerate() {
                    let mut acc = 0.0;
                    let mut err = 0.0;
                    for w in tip.neighbors() {
                        let weight = WeightField::Zipper.weight_f64(tip, w);
                        let e = lookup(w);
                        acc += weight * e.value;
                        err += weight.abs() * e.error;
                    }
                    entries[row][col] = Estimate {
                        value: acc,
                        error: err,
                        mode: Provenance::Extrapolated,
                    };
                }
            }
            let det = entries[0][0].value * entries[1][1].value
                - entries[0][1].value * entries[1][0].value;
            let err = entries[0][0].error.max(entries[0][1].error)
                + entries[1][0].error.max(entries[1][1].error);
            let scale = entries
                .iter()
                .flatten()
                .fold(0.0f64, |m, e| m.max(e.value.abs()));
            Ok((det, err * scale))
        };
        let (num, num_err) = dq(next)?;
        let (den, den_err) = dq(base)?;
        if den.abs() <= self.config.degenerate_tol {
            return Err(Error::DegenerateDeterminant(den));
        }
        let value = (num / den).abs();
        let error = value * (num_err / num.abs() + den_err / den.abs());
        Ok(Estimate {
            value,
            error,
            mode: Provenance::Extrapolated,
        })
    }

    fn dq_ratio(&self, next: &Saw, base: &Saw) -> Result<Estimate> {
        match &self.config.dq_mode {
            DqMode::Strip(ns) => self.dq_ratio_strip(next, base, ns),
            DqMode::Infinite(radii) => self.dq_ratio_infinite(next, base, radii),
        }
    }

    /// One canonicalized determinant-route step: the base walk already has
    /// its first forward step at `1` and `zeta` extends its forward tip.
    fn det_step(&self, eta: &Saw, zeta: Site) -> Result<TransitionResult> {
        let extended = eta.concat_step(zeta)?;
        let gq = self.gq_diag(eta, zeta)?;
        let ratio = self.dq_ratio(&extended, eta)?;
        let probability = gq.mul(ratio).scale(0.25);
        let mut components = BTreeMap::new();
        components.insert("step_weight".into(), 0.25);
        components.insert("gq_diag".into(), gq.value);
        components.insert("dq_ratio_abs".into(), ratio.value);
        Ok(TransitionResult {
            probability,
            route: Route::Determinant,
            components,
        })
    }

    /// Transition probability `p(eta^zeta | eta)` by the determinant route.
    ///
    /// The pair `(eta, zeta)` is rotated so the formula's normalization
    /// `eta_1 = 1` holds; a walk with no forward step is handled through
    /// reversal and translation invariance.
    pub fn transition_prob_det(&self, eta: &Saw, zeta: Site) -> Result<TransitionResult> {
        if eta.contains(zeta) {
            return Err(Error::SelfIntersection(zeta));
        }
        if !eta.plus_end().is_neighbor(zeta) {
            return Err(Error::NotNeighbor(eta.plus_end(), zeta));
        }
        if eta.forward_len() == 0 {
            // no forward step to normalize: express the ratio through the
            // chained path weights of the reversal-translated walks
            let num = self.phat_det(&eta.concat_step(zeta)?)?;
            let den = self.phat_det(eta)?;
            let value = num.value / den.value;
            let error = value * (num.error / num.value + den.error / den.value);
            let mut components = BTreeMap::new();
            components.insert("phat_extended".into(), num.value);
            components.insert("phat_base_inv".into(), 1.0 / den.value);
            return Ok(TransitionResult {
                probability: Estimate {
                    value,
                    error,
                    mode: Provenance::Extrapolated,
                },
                route: Route::Determinant,
                components,
            });
        }
        let (canon, g) = eta.canonicalize_first_step()?;
        self.det_step(&canon, g.apply(zeta))
    }

    /// Path weight `p(eta)` by chaining determinant-route steps from the
    /// single-edge base case `p = 1/4`.
    pub fn phat_det(&self, eta: &Saw) -> Result<Estimate> {
        let eta_o = eta.translate_to_origin();
        if eta_o.edge_count() == 0 {
            return Ok(Estimate::exact(1.0));
        }
        let (canon, _) = eta_o.canonicalize_first_step()?;
        let verts = canon.vertices();
        let mut acc = Estimate {
            value: 0.25,
            error: 0.0,
            mode: Provenance::ExactRational,
        };
        for i in 1..verts.len() - 1 {
            let prefix = Saw::new(verts[..=i].to_vec(), 0)?;
            let step = self.det_step(&prefix, verts[i + 1])?;
            acc = acc.mul(step.probability);
        }
        Ok(acc)
    }

    /// Path weight by the sampling route:
    /// `(2d)^(-len) * F_eta * phi(eta)` with `d = 2`.
    pub fn phat_green_phi(&self, eta: &Saw) -> Result<TransitionResult> {
        let eta_o = eta.translate_to_origin();
        let edges = eta_o.edge_count();
        if edges == 0 {
            let mut components = BTreeMap::new();
            components.insert("step_weight".into(), 1.0);
            components.insert("loop_term".into(), 1.0);
            components.insert("phi".into(), 1.0);
            return Ok(TransitionResult {
                probability: Estimate::exact(1.0),
                route: Route::GreenPhi,
                components,
            });
        }
        // the loop term shares the phi schedule: both factors carry
        // compensating finite-domain corrections that cancel in the product
        // when accelerated over the same domains
        let loop_term =
            linops::loop_term_slit_plane(eta_o.vertices(), &self.config.phi_radii, self.config.opts)?;
        let phi = self.phi_of(&eta_o)?;
        let step_weight = 0.25f64.powi(edges as i32);
        let phi_est = Estimate::monte_carlo(phi.value, phi.standard_error);
        let probability = loop_term.mul(phi_est).scale(step_weight);
        let mut components = BTreeMap::new();
        components.insert("step_weight".into(), step_weight);
        components.insert("loop_term".into(), loop_term.value);
        components.insert("phi".into(), phi.value);
        Ok(TransitionResult {
            probability,
            route: Route::GreenPhi,
            components,
        })
    }

    /// Transition probability by the sampling route, evaluated with matched
    /// domains: `1/4 * G_{D_R \ eta}(zeta, zeta) * phi_R(eta^zeta) /
    /// phi_R(eta)` at the largest scheduled radius, the smaller radii
    /// feeding the error field.
    pub fn transition_prob_green(&self, eta: &Saw, zeta: Site) -> Result<TransitionResult> {
        if eta.contains(zeta) {
            return Err(Error::SelfIntersection(zeta));
        }
        if !eta.plus_end().is_neighbor(zeta) {
            return Err(Error::NotNeighbor(eta.plus_end(), zeta));
        }
        let shift = eta.minus_end();
        let eta_o = eta.translate_to_origin();
        let zeta_o = zeta.translate(-shift.x, -shift.y);
        let extended = eta_o.concat_step(zeta_o)?;
        let seed = self.config.seed ^ saw_hash(&extended);

        let mut values = Vec::new();
        let mut last = None;
        for (k, &r) in self.config.phi_radii.iter().enumerate() {
            let domain = FiniteDomain::disk(r).minus(eta_o.vertices());
            let g = linops::green(&domain, WeightField::Standard, zeta_o, zeta_o, self.config.opts)?;
            let mc = &montecarlo::McDomain::disk(r);
            let num =
                montecarlo::phi_raw(&extended, mc, seed, 300 + 2 * k as u64, self.config.mc_samples);
            let den = montecarlo::phi_raw(&eta_o, mc, seed, 301 + 2 * k as u64, self.config.mc_samples);
            for side in [&num, &den] {
                if side.n_accepted < self.config.mc_min_accepted {
                    return Err(Error::InsufficientAcceptance {
                        got: side.n_accepted,
                        min: self.config.mc_min_accepted,
                    });
                }
            }
            let ratio = montecarlo::McEstimate::independent_ratio(num, den)?;
            values.push(0.25 * g * ratio.value);
            last = Some((g, ratio));
        }
        let (g, ratio) = last.unwrap();
        let value = values[values.len() - 1];
        let trend = if values.len() >= 2 {
            (value - values[values.len() - 2]).abs()
        } else {
            0.0
        };
        let noise = value * ratio.standard_error / ratio.value;
        let mut components = BTreeMap::new();
        components.insert("step_weight".into(), 0.25);
        components.insert("green_diag".into(), g);
        components.insert("phi_ratio".into(), ratio.value);
        Ok(TransitionResult {
            probability: Estimate {
                value,
                error: noise + 0.5 * trend,
                mode: Provenance::MonteCarlo,
            },
            route: Route::GreenPhi,
            components,
        })
    }

    /// Raw strip determinant `D^q_n` for diagnostics and scaling tests.
    /// The walk must be canonicalized (`eta_1 = 1`).
    pub fn dq_det_strip(&self, eta: &Saw, n: i64) -> Result<f64> {
        Ok(self.dq_at_strip(eta, n)?.det)
    }

    /// The trivial-walk escape probability at one radius, shared by every
    /// ratio under this engine (a common denominator does not bias the
    /// individual ratios and halves the sampling work).
    fn phi_baseline(&self, r: f64) -> montecarlo::McEstimate {
        let key = r.to_bits();
        if let Some(hit) = self.phi_baseline_cache.lock().unwrap().get(&key) {
            return *hit;
        }
        let est = montecarlo::phi_raw(
            &Saw::trivial(),
            &montecarlo::McDomain::disk(r),
            self.config.seed ^ key.rotate_left(17),
            1,
            self.config.mc_samples,
        );
        self.phi_baseline_cache.lock().unwrap().insert(key, est);
        est
    }

    /// The normalized escape ratio `phi(eta)` over the engine's schedule.
    fn phi_of(&self, eta_o: &Saw) -> Result<montecarlo::McEstimate> {
        let mut ratios = Vec::with_capacity(self.config.phi_radii.len());
        for &r in &self.config.phi_radii {
            let num = montecarlo::phi_raw(
                &eta_o.clone(),
                &montecarlo::McDomain::disk(r),
                self.config.seed ^ saw_hash(eta_o) ^ r.to_bits().rotate_left(33),
                2,
                self.config.mc_samples,
            );
            let den = self.phi_baseline(r);
            for side in [&num, &den] {
                if side.n_accepted < self.config.mc_min_accepted {
                    return Err(Error::InsufficientAcceptance {
                        got: side.n_accepted,
                        min: self.config.mc_min_accepted,
                    });
                }
            }
            ratios.push(montecarlo::McEstimate::independent_ratio(num, den)?);
        }
        Ok(montecarlo::combine_ratio_series(&ratios))
    }
}
