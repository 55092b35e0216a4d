// Scratch probe for tuning numeric policies; not part of the shipped CLI.
use lerw::harmonic::{v_eta_strip, StripKernel, StripSide};
use lerw::lattice::{Saw, Site};
use lerw::linops::{self, FiniteDomain};
use lerw::solve::SolverOptions;
use lerw::weights::WeightField;

fn straight(k: i64) -> Saw {
    Saw::new((0..=k).map(|x| Site::new(x, 0)).collect(), 0).unwrap()
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    let opts = SolverOptions::default();

    if which == "decay" {
        // signed kernel mass decay exponent configurations
        let k_set = [Site::ORIGIN, Site::new(1, 0)];
        for zs in [
            vec![Site::new(-4, 0), Site::new(-8, 0), Site::new(-16, 0)],
        ] {
            for radii in [vec![64.0, 128.0, 256.0]] {
                let mut per_radius = Vec::new();
                for &r in &radii {
                    let domain = FiniteDomain::disk(r).minus(&k_set);
                    let mut mass = vec![0.0; zs.len()];
                    for &w in &k_set {
                        let h = domain
                            .solve_dirichlet(
                                WeightField::Zipper,
                                |s| if s == w { 1.0 } else { 0.0 },
                                opts,
                            )
                            .unwrap();
                        for (zi, &z) in zs.iter().enumerate() {
                            mass[zi] += h[domain.index_of(z).unwrap()].abs();
                        }
                    }
                    per_radius.push(mass);
                }
                println!("zs {:?} radii {:?}", zs, radii);
                let mut masses = Vec::new();
                for (zi, z) in zs.iter().enumerate() {
                    let raw: Vec<f64> = per_radius.iter().map(|m| m[zi]).collect();
                    let est = lerw::estimate::extrapolate_dyadic(
                        &raw,
                        lerw::estimate::ExtrapolationPolicy::default(),
                    )
                    .unwrap();
                    println!("  |z|={:7.2} raw {:?} extrap {:.6}", z.abs(), raw, est.value);
                    masses.push(est.value);
                }
                for w in masses.windows(2) {
                    println!("  slope {:.4}", (w[1] / w[0]).log2());
                }
            }
        }
    }

    if which == "dq" {
        // strip determinant convergence for straight lines and a bend
        for eta in [straight(1), straight(2), "(0,0);(1,0);(1,1)".parse().unwrap()] {
            println!("eta = {eta}");
            for n in [16i64, 32, 64, 128] {
                let vk = StripKernel::build(n, &eta, StripSide::Minus, opts).unwrap();
                let uk = StripKernel::build(n, &eta, StripSide::Plus, opts).unwrap();
                let tips = [eta.minus_end(), eta.plus_end()];
                let mut e = [[0.0f64; 2]; 2];
                for (c, &t) in tips.iter().enumerate() {
                    e[0][c] = linops::laplacian_apply(WeightField::Zipper, |s| vk.value(s), t);
                    e[1][c] = linops::laplacian_apply(WeightField::Zipper, |s| uk.value(s), t);
                }
                let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
                let n32 = (n as f64).powf(1.5);
                println!(
                    "  n={n:4}  Lv-={:+.3e} Lv+={:+.3e} Lu-={:+.3e} Lu+={:+.3e}  n^3*det={:+.8e}",
                    e[0][0] * n32,
                    e[0][1] * n32,
                    e[1][0] * n32,
                    e[1][1] * n32,
                    det * n32 * n32
                );
            }
        }
    }

    if which == "dqratio" {
        // the ratio that enters the transition formula
        for (base, next) in [
            (straight(1), straight(2)),
            (straight(2), straight(3)),
            (
                straight(1),
                "(0,0);(1,0);(1,1)".parse::<Saw>().unwrap(),
            ),
        ] {
            println!("ratio D({next})/D({base})");
            for n in [16i64, 32, 64, 128] {
                let dq = |eta: &Saw| {
                    let vk = StripKernel::build(n, eta, StripSide::Minus, opts).unwrap();
                    let uk = StripKernel::build(n, eta, StripSide::Plus, opts).unwrap();
                    let tips = [eta.minus_end(), eta.plus_end()];
                    let mut e = [[0.0f64; 2]; 2];
                    for (c, &t) in tips.iter().enumerate() {
                        e[0][c] = linops::laplacian_apply(WeightField::Zipper, |s| vk.value(s), t);
                        e[1][c] = linops::laplacian_apply(WeightField::Zipper, |s| uk.value(s), t);
                    }
                    e[0][0] * e[1][1] - e[0][1] * e[1][0]
                };
                println!("  n={n:4}  ratio={:.8}", (dq(&next) / dq(&base)).abs());
            }
        }
    }

    if which == "gq" {
        // signed Green diagonal convergence toward 4 (sqrt 2 - 1)
        let target = 4.0 * (2f64.sqrt() - 1.0);
        for k in [1i64, 2, 3] {
            let eta = straight(k);
            let zeta = Site::new(k + 1, 0);
            let vals = linops::green_diag_slit_plane_values(
                &eta,
                WeightField::Zipper,
                zeta,
                &[32.0, 64.0, 128.0, 256.0],
                opts,
            )
            .unwrap();
            println!("k={k} values {vals:?} (target {target:.7})");
            for w in vals.windows(2) {
                let ext = w[1] + (w[1] - w[0]) / (2f64.sqrt() - 1.0);
                println!("   extrap(sqrt): {ext:.7}  rel {:.2e}", (ext - target) / target);
            }
        }
    }

    if which == "phat" {
        // end-to-end straight-line accuracy at acceptance scales
        use lerw::transition::{DqMode, Engine, EngineConfig};
        let engine = Engine::new(EngineConfig {
            dq_mode: DqMode::Strip(vec![32, 64, 128]),
            gq_radii: vec![64.0, 128.0, 256.0],
            ..Default::default()
        });
        let sqrt2m1 = 2f64.sqrt() - 1.0;
        for k in 1..=6i64 {
            let t0 = std::time::Instant::now();
            let est = engine.phat_det(&straight(k)).unwrap();
            let target = 0.25 * sqrt2m1.powi(k as i32 - 1);
            println!(
                "k={k}  phat={:.9e}  target={:.9e}  rel={:+.2e}  err={:.1e}  ({:.1?})",
                est.value,
                target,
                (est.value - target) / target,
                est.error,
                t0.elapsed()
            );
        }
        for k in 1..=4i64 {
            let t = engine
                .transition_prob_det(&straight(k), Site::new(k + 1, 0))
                .unwrap();
            println!(
                "trans k={k}  p={:.9}  abs={:+.2e}  err={:.1e}",
                t.probability.value,
                t.probability.value - sqrt2m1,
                t.probability.error
            );
        }
    }

    if which == "greenphi" {
        use lerw::transition::{Engine, EngineConfig};
        let engine = Engine::new(EngineConfig {
            mc_samples: 2_000_000,
            mc_min_accepted: 10_000,
            ..Default::default()
        });
        for eta in [straight(1), straight(2), "(0,0);(1,0);(1,1)".parse().unwrap()] {
            let t0 = std::time::Instant::now();
            let mc = engine.phat_green_phi(&eta).unwrap();
            let det = engine.phat_det(&eta).unwrap();
            println!(
                "eta={eta}  green_phi={:.6} +- {:.4}  det={:.6} +- {:.5}  gap={:+.2e}  ({:.1?})",
                mc.probability.value,
                mc.probability.error,
                det.value,
                det.error,
                mc.probability.value - det.value,
                t0.elapsed()
            );
        }
    }

    if which == "components" {
        // per-radius factors of the sampling route for eta = [0,1]
        use lerw::montecarlo::{phi_raw, McDomain, McEstimate};
        let eta = straight(1);
        let radii = [16.0, 32.0, 64.0];
        let n = 2_000_000u64;
        for (k, &r) in radii.iter().enumerate() {
            let f = linops::loop_term_f64(&FiniteDomain::disk(r), eta.vertices(), opts).unwrap();
            let num = phi_raw(&eta, &McDomain::disk(r), 9, 2 * k as u64 + 10, n);
            let den = phi_raw(&Saw::trivial(), &McDomain::disk(r), 9, 2 * k as u64 + 11, n);
            let ratio = McEstimate::independent_ratio(num, den).unwrap();
            println!(
                "R={r:5}: F={f:.6}  phi_eta={:.5} ({} acc)  phi_0={:.5} ({} acc)  ratio={:.5}+-{:.5}  product/4={:.6}",
                num.value,
                num.n_accepted,
                den.value,
                den.n_accepted,
                ratio.value,
                ratio.standard_error,
                0.25 * f * ratio.value
            );
        }
    }

    if which == "strip_scaling" {
        let eta: Saw = "(0,0);(1,0)".parse().unwrap();
        let z = Site::new(-2, 0);
        for n in [32i64, 64, 128] {
            let est = v_eta_strip(n, &eta, z, opts).unwrap();
            println!(
                "n={n:4} v={:.6e} n^1.5 v = {:.8}",
                est.value,
                (n as f64).powf(1.5) * est.value
            );
        }
    }
}
