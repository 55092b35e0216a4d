//! Command-line front end.
//!
//! Every command writes a machine-readable result (JSON by default, CSV for
//! tables) that embeds the fully resolved configuration and the crate
//! version, so identical invocations produce byte-identical files.  Exit
//! codes: 0 success, 1 parse errors, 2 precondition violations, 3
//! convergence or sampling failures.

use crate::error::Error;
use crate::harmonic::{self, VTable};
use crate::lattice::{Saw, Site};
use crate::montecarlo::{self, RngStream};
use crate::solve::SolverOptions;
use crate::transition::{DqMode, Engine, EngineConfig, TransitionResult};
use crate::validate::{self, ValidateConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "lerw",
    version,
    about = "Transition probabilities of the infinite two-sided loop-erased random walk on Z^2"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for all randomness; no entropy is drawn from the environment.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Relative residual target of the iterative solver.
    #[arg(long, global = true, default_value_t = 1e-12)]
    cg_tol: f64,

    /// Floating-point precision of the solvers; `f64` is the supported
    /// value (exact-rational arithmetic backs the oracle paths).
    #[arg(long, global = true, default_value = "f64")]
    precision: String,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RouteArg {
    Det,
    Green,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormatArg {
    Json,
    Csv,
}

/// Numeric scales shared by the probability commands.
#[derive(Args, Debug, Serialize)]
struct ScaleArgs {
    /// Strip widths for the tip determinants.
    #[arg(long, value_delimiter = ',', default_values_t = [16i64, 32, 64])]
    strip_ns: Vec<i64>,

    /// Disk radii for the signed Green's-function diagonal.
    #[arg(long, value_delimiter = ',', default_values_t = [32.0, 64.0, 128.0])]
    gq_schedule: Vec<f64>,

    /// Disk radii for the sampling route.
    #[arg(long, value_delimiter = ',', default_values_t = [16.0, 32.0, 64.0])]
    phi_schedule: Vec<f64>,

    /// Raw samples per Monte Carlo estimate.
    #[arg(long, default_value_t = 400_000)]
    samples: u64,

    /// Minimum accepted samples before an estimate is trusted.
    #[arg(long, default_value_t = 2_000)]
    min_accepted: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the discrete square-root functions v and u over a window.
    VTable {
        /// Half-width of the square window around the origin.
        #[arg(long, default_value_t = 3)]
        window: i64,

        /// Dyadic radius schedule for the escape-probability solves.
        #[arg(long, value_delimiter = ',', default_values_t = [32.0, 64.0, 128.0])]
        schedule: Vec<f64>,

        /// Add the closed-form asymptotic column `(4/pi) Im sqrt(z)`.
        #[arg(long)]
        compare_asymptotic: bool,

        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },

    /// One-step transition probability for extending a walk by one site.
    Transition {
        /// The walk, e.g. "(0,0);(1,0)"; must visit the origin.
        #[arg(long)]
        eta: String,

        /// The extension site, e.g. "(2,0)".
        #[arg(long)]
        zeta: String,

        #[arg(long, value_enum, default_value_t = RouteArg::Det)]
        route: RouteArg,

        #[command(flatten)]
        scales: ScaleArgs,
    },

    /// Path weight of a finite walk through the origin.
    Phat {
        #[arg(long)]
        eta: String,

        #[arg(long, value_enum, default_value_t = RouteArg::Det)]
        route: RouteArg,

        #[command(flatten)]
        scales: ScaleArgs,
    },

    /// The straight-line closed-form checks (validation criteria 1-3).
    Straightline,

    /// Run the acceptance suite.
    Validate {
        /// Oracle-only subset in exact arithmetic (fast).
        #[arg(long)]
        quick: bool,

        /// Run only criteria matching this number or name fragment.
        #[arg(long)]
        criterion: Option<String>,
    },

    /// Sample conditioned chordal loop erasures crossing the strip.
    SampleLerw {
        /// Strip half-width n (endpoints at -n and +n).
        #[arg(long, default_value_t = 16)]
        strip_n: i64,

        /// Number of accepted samples to produce.
        #[arg(long, default_value_t = 4)]
        samples: u64,

        /// Attempt budget per accepted sample.
        #[arg(long, default_value_t = 200_000_000)]
        max_tries: u64,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::InvalidWalk(_) | Error::OriginMissing => 1,
        Error::NotNeighbor(..)
        | Error::SelfIntersection(_)
        | Error::NotLoop(..)
        | Error::NoForwardStep
        | Error::OutsideDomain(_)
        | Error::DimensionUnsupported(_) => 2,
        Error::Singular
        | Error::SolverStalled { .. }
        | Error::NotConverged(_)
        | Error::DegenerateDeterminant(_)
        | Error::DivideByZero(_)
        | Error::InsufficientAcceptance { .. }
        | Error::MaxTriesExceeded(_) => 3,
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn json_envelope(config: serde_json::Value, result: serde_json::Value) -> String {
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).unwrap();
    s.push('\n');
    s
}

fn csv_envelope(config: &serde_json::Value, table: &str) -> String {
    format!(
        "# version: {}\n# config: {}\n{}",
        env!("CARGO_PKG_VERSION"),
        config,
        table
    )
}

struct TransitionOutput {
    det: Option<TransitionResult>,
    green: Option<TransitionResult>,
}

fn run_transition(
    engine: &Engine,
    eta: &Saw,
    zeta: Site,
    route: RouteArg,
) -> Result<TransitionOutput, Error> {
    let det = match route {
        RouteArg::Det | RouteArg::Both => Some(engine.transition_prob_det(eta, zeta)?),
        RouteArg::Green => None,
    };
    let green = match route {
        RouteArg::Green | RouteArg::Both => Some(engine.transition_prob_green(eta, zeta)?),
        RouteArg::Det => None,
    };
    Ok(TransitionOutput { det, green })
}

/// Parses the arguments and runs the selected command; returns the process
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if cli.precision != "f64" {
        eprintln!(
            "unsupported precision {:?}; the solvers run in f64 (exact \
             rational arithmetic backs the oracle paths)",
            cli.precision
        );
        return 1;
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn engine_from(scales: &ScaleArgs, seed: u64, opts: SolverOptions) -> Engine {
    Engine::new(EngineConfig {
        dq_mode: DqMode::Strip(scales.strip_ns.clone()),
        gq_radii: scales.gq_schedule.clone(),
        phi_radii: scales.phi_schedule.clone(),
        mc_samples: scales.samples,
        mc_min_accepted: scales.min_accepted,
        seed,
        opts,
        ..Default::default()
    })
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    let opts = SolverOptions {
        tol: cli.cg_tol,
        ..Default::default()
    };
    match &cli.command {
        Command::VTable {
            window,
            schedule,
            compare_asymptotic,
            format,
        } => {
            let config = json!({
                "command": "v-table",
                "window": window,
                "schedule": schedule,
                "compare_asymptotic": compare_asymptotic,
                "format": format,
                "seed": cli.seed,
                "cg_tol": cli.cg_tol,
                "precision": cli.precision,
            });
            let table = VTable::build(schedule, opts)?;
            let mut rows = Vec::new();
            let mut failures = 0u64;
            for y in -*window..=*window {
                for x in -*window..=*window {
                    let z = Site::new(x, y);
                    match (table.v(z), table.u(z)) {
                        (Ok(v), Ok(u)) => rows.push((z, v, u)),
                        _ => failures += 1,
                    }
                }
            }
            let content = match format {
                FormatArg::Csv => {
                    let mut t = String::from(if *compare_asymptotic {
                        "x,y,v,v_err,u,u_err,v_asymptotic\n"
                    } else {
                        "x,y,v,v_err,u,u_err\n"
                    });
                    for (z, v, u) in &rows {
                        if *compare_asymptotic {
                            t.push_str(&format!(
                                "{},{},{:.12e},{:.3e},{:.12e},{:.3e},{:.12e}\n",
                                z.x,
                                z.y,
                                v.value,
                                v.error,
                                u.value,
                                u.error,
                                4.0 / std::f64::consts::PI * harmonic::im_sqrt(*z)
                            ));
                        } else {
                            t.push_str(&format!(
                                "{},{},{:.12e},{:.3e},{:.12e},{:.3e}\n",
                                z.x, z.y, v.value, v.error, u.value, u.error
                            ));
                        }
                    }
                    if failures > 0 {
                        t.push_str(&format!("# partial: {failures} sites did not converge\n"));
                    }
                    csv_envelope(&config, &t)
                }
                FormatArg::Json => {
                    let entries: Vec<_> = rows
                        .iter()
                        .map(|(z, v, u)| json!({"x": z.x, "y": z.y, "v": v, "u": u}))
                        .collect();
                    json_envelope(config.clone(), json!({"entries": entries, "failures": failures}))
                }
            };
            emit(&cli.out, &content).map_err(|e| Error::Parse(e.to_string()))?;
            Ok(if failures > 0 { 2 } else { 0 })
        }

        Command::Transition {
            eta,
            zeta,
            route,
            scales,
        } => {
            let saw: Saw = eta.parse()?;
            let site: Site = zeta.parse()?;
            let config = json!({
                "command": "transition",
                "eta": eta,
                "zeta": zeta,
                "route": route,
                "scales": scales,
                "seed": cli.seed,
                "cg_tol": cli.cg_tol,
                "precision": cli.precision,
            });
            let engine = engine_from(scales, cli.seed, opts);
            let out = run_transition(&engine, &saw, site, *route)?;
            let mut result = serde_json::Map::new();
            result.insert("eta".into(), json!(saw.to_string()));
            result.insert("zeta".into(), json!(site.to_string()));
            if let Some(det) = &out.det {
                result.insert("det".into(), serde_json::to_value(det).unwrap());
            }
            if let Some(green) = &out.green {
                result.insert("green".into(), serde_json::to_value(green).unwrap());
            }
            if let (Some(d), Some(g)) = (&out.det, &out.green) {
                result.insert(
                    "difference".into(),
                    json!(d.probability.value - g.probability.value),
                );
            }
            emit(&cli.out, &json_envelope(config, result.into()))
                .map_err(|e| Error::Parse(e.to_string()))?;
            Ok(0)
        }

        Command::Phat { eta, route, scales } => {
            let saw: Saw = eta.parse()?;
            let config = json!({
                "command": "phat",
                "eta": eta,
                "route": route,
                "scales": scales,
                "seed": cli.seed,
                "cg_tol": cli.cg_tol,
                "precision": cli.precision,
            });
            let engine = engine_from(scales, cli.seed, opts);
            let mut result = serde_json::Map::new();
            result.insert("eta".into(), json!(saw.to_string()));
            match route {
                RouteArg::Det => {
                    result.insert(
                        "det".into(),
                        serde_json::to_value(engine.phat_det(&saw)?).unwrap(),
                    );
                }
                RouteArg::Green => {
                    result.insert(
                        "green".into(),
                        serde_json::to_value(engine.phat_green_phi(&saw)?).unwrap(),
                    );
                }
                RouteArg::Both => {
                    let d = engine.phat_det(&saw)?;
                    let g = engine.phat_green_phi(&saw)?;
                    result.insert("difference".into(), json!(d.value - g.probability.value));
                    result.insert("det".into(), serde_json::to_value(d).unwrap());
                    result.insert("green".into(), serde_json::to_value(g).unwrap());
                }
            }
            emit(&cli.out, &json_envelope(config, result.into()))
                .map_err(|e| Error::Parse(e.to_string()))?;
            Ok(0)
        }

        Command::Straightline => {
            let config = ValidateConfig {
                quick: false,
                filter: Some("straightline".into()),
                seed: cli.seed,
            };
            let report = validate::run(&config);
            let doc = json_envelope(
                json!({"command": "straightline", "seed": cli.seed}),
                serde_json::to_value(&report).unwrap(),
            );
            if cli.out.is_some() {
                emit(&cli.out, &doc).map_err(|e| Error::Parse(e.to_string()))?;
            }
            Ok(if report.all_passed { 0 } else { 3 })
        }

        Command::Validate { quick, criterion } => {
            let config = ValidateConfig {
                quick: *quick,
                filter: criterion.clone(),
                seed: cli.seed,
            };
            let report = validate::run(&config);
            let doc = json_envelope(
                json!({
                    "command": "validate",
                    "quick": quick,
                    "criterion": criterion,
                    "seed": cli.seed,
                }),
                serde_json::to_value(&report).unwrap(),
            );
            if cli.out.is_some() {
                emit(&cli.out, &doc).map_err(|e| Error::Parse(e.to_string()))?;
            }
            Ok(if report.all_passed { 0 } else { 3 })
        }

        Command::SampleLerw {
            strip_n,
            samples,
            max_tries,
        } => {
            let config = json!({
                "command": "sample-lerw",
                "strip_n": strip_n,
                "samples": samples,
                "max_tries": max_tries,
                "seed": cli.seed,
            });
            let mut walks = Vec::new();
            let mut attempts = 0u64;
            for i in 0..*samples {
                let stream = RngStream::new(cli.seed, montecarlo::phase_stream(7, i));
                let (saw, stats) = montecarlo::chordal_lerw_conditioned(*strip_n, stream, *max_tries)?;
                attempts += stats.attempts;
                walks.push(saw.to_string());
            }
            let acceptance = montecarlo::McEstimate::frequency(*samples, attempts);
            let doc = json_envelope(
                config,
                json!({"walks": walks, "acceptance": acceptance}),
            );
            emit(&cli.out, &doc).map_err(|e| Error::Parse(e.to_string()))?;
            Ok(0)
        }
    }
}
