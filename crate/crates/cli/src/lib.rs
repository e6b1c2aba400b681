//! Command-line front end: curve I/O, the four subcommands and SVG output.
//!
//! All distances, thresholds and coordinates on the command line and in the
//! JSON output are in normalized units unless `--normalize false` is given;
//! the applied map is reported as `normalization`.

pub mod io;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use frechet_kit::cluster::{kl_median, FinderOverrides};
use frechet_kit::frechet::frechet_distance;
use frechet_kit::simplify::{bicriteria_simplify, check_simplification};
use frechet_kit::twophase::{solve_q, QInstance, SolveMode, SolveOptions, SolveOutcome};
use frechet_kit::{Error, PolygonalCurve};
use serde::Serialize;
use serde_json::json;

use crate::io::load_all;
use crate::svg::{emit_svg, CellBox};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NULL: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "frechet-kit", version, about = "Fréchet distance, curve simplification and curve clustering")]
pub struct Cli {
    /// Worker threads for the solvers.
    #[arg(long, global = true, env = "FRECHET_KIT_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Scale all input to a unit-diameter bounding box.
    #[arg(long, global = true, default_value_t = true, action = clap::ArgAction::Set)]
    pub normalize: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fréchet distance between the first curves of two files.
    Dist(DistArgs),
    /// Simplify a curve with few vertices within (1 + eps) delta.
    Simplify(SimplifyArgs),
    /// One curve of at most `ell` vertices close to every input curve.
    Repr(ReprArgs),
    /// (k, ell)-median clustering.
    Cluster(ClusterArgs),
}

#[derive(Args, Debug)]
pub struct DistArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct SimplifyArgs {
    pub curve: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    /// Search nodes per solver call.
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Full,
    Subset5l,
}

#[derive(Args, Debug)]
pub struct ReprArgs {
    #[arg(required = true)]
    pub curves: Vec<PathBuf>,
    #[arg(long)]
    pub ell: usize,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// One threshold per curve, or a single value used for all.
    #[arg(long, value_delimiter = ',', required = true)]
    pub thresholds: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    pub mode: ModeArg,
    /// Accepted for uniformity; the solver is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[arg(required = true)]
    pub curves: Vec<PathBuf>,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub ell: usize,
    #[arg(long, default_value_t = 0.2)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Search nodes per two-phase search.
    #[arg(long, default_value_t = 20_000)]
    pub budget: u64,
    /// Number of sampled curves; the sampling formula when absent.
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Size of each enumerated subset; |Y| / (2 beta) when absent.
    #[arg(long)]
    pub subset_size: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub max_subsets: usize,
    /// Threshold factors around the median distances; the full grid when absent.
    #[arg(long, value_delimiter = ',')]
    pub threshold_factors: Option<Vec<f64>>,
    #[arg(long)]
    pub max_w: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub max_searches: u64,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// JSON text to print and the process exit code.
pub struct Output {
    pub json: String,
    pub code: u8,
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn coords(c: &PolygonalCurve) -> Vec<Vec<f64>> {
    c.vertices().iter().map(|p| p.coords().to_vec()).collect()
}

fn failure(e: impl std::fmt::Display, code: u8) -> Output {
    let status = if code == EXIT_BUDGET { "budget_exceeded" } else { "error" };
    Output {
        json: to_json(&json!({ "status": status, "message": e.to_string() })),
        code,
    }
}

fn core_failure(e: Error) -> Output {
    match e {
        Error::BudgetExceeded(_) => failure(e, EXIT_BUDGET),
        _ => failure(e, EXIT_ERROR),
    }
}

pub fn run(cli: &Cli) -> Output {
    match &cli.command {
        Command::Dist(a) => dist(a, cli.normalize),
        Command::Simplify(a) => simplify(a, cli.normalize),
        Command::Repr(a) => repr(a, cli.normalize, cli.threads),
        Command::Cluster(a) => cluster(a, cli.normalize, cli.threads),
    }
}

fn dist(a: &DistArgs, normalize: bool) -> Output {
    let (curves, norm) = match load_all(&[&a.a, &a.b], normalize) {
        Ok(v) => v,
        Err(e) => return failure(e, EXIT_ERROR),
    };
    // the second file starts after every curve of the first
    let first_len = match io::load_curves(&a.a, io::Format::from_path(&a.a)) {
        Ok(c) => c.len(),
        Err(e) => return failure(e, EXIT_ERROR),
    };
    let r = frechet_distance(&curves[0], &curves[first_len], a.tol);
    Output {
        json: to_json(&json!({
            "value": r.value,
            "lower": r.lower,
            "upper": r.upper,
            "tol": a.tol,
            "normalization": norm,
        })),
        code: EXIT_OK,
    }
}

fn write_svg(path: &Option<PathBuf>, inputs: &[PolygonalCurve], result: &[PolygonalCurve], cells: &[CellBox]) -> Result<(), Output> {
    if let Some(p) = path {
        emit_svg(inputs, result, cells, p).map_err(|e| failure(format!("{}: {e}", p.display()), EXIT_ERROR))?;
    }
    Ok(())
}

fn simplify(a: &SimplifyArgs, normalize: bool) -> Output {
    let (curves, norm) = match load_all(std::slice::from_ref(&a.curve), normalize) {
        Ok(v) => v,
        Err(e) => return failure(e, EXIT_ERROR),
    };
    let tau = &curves[0];
    let r = match bicriteria_simplify(tau, a.delta, a.alpha, a.eps, a.budget) {
        Ok(r) => r,
        Err(e) => return core_failure(e),
    };
    let bound = (1.0 + a.eps) * a.delta;
    let pass = check_simplification(&r.curve, tau, a.delta, a.eps);
    if let Err(o) = write_svg(&a.svg, &curves[..1], std::slice::from_ref(&r.curve), &[]) {
        return o;
    }
    Output {
        json: to_json(&json!({
            "status": "curve",
            "vertices": coords(&r.curve),
            "vertex_count": r.curve.len(),
            "input_vertex_count": tau.len(),
            "frechet_check": { "bound": bound, "pass": pass },
            "blocks": r.blocks,
            "solver_calls": r.solves,
            "fallback_used": r.fallback_used,
            "normalization": norm,
        })),
        code: EXIT_OK,
    }
}

fn repr(a: &ReprArgs, normalize: bool, threads: usize) -> Output {
    let (curves, norm) = match load_all(&a.curves, normalize) {
        Ok(v) => v,
        Err(e) => return failure(e, EXIT_ERROR),
    };
    let thresholds = if a.thresholds.len() == 1 {
        vec![a.thresholds[0]; curves.len()]
    } else {
        a.thresholds.clone()
    };
    let inst = match QInstance::new(curves.clone(), thresholds.clone(), a.ell, a.eps) {
        Ok(i) => i,
        Err(e) => return core_failure(e),
    };
    let opts = SolveOptions {
        mode: match a.mode {
            ModeArg::Full => SolveMode::Full,
            ModeArg::Subset5l => SolveMode::Subset5l,
        },
        node_budget: a.budget,
        threads,
        ..SolveOptions::default()
    };
    let slack = a.eps * inst.delta_max();
    match solve_q(&inst, &opts) {
        Ok(SolveOutcome::Found { curve, report }) => {
            let per_curve: Vec<_> = curves
                .iter()
                .zip(&thresholds)
                .map(|(tau, &t)| {
                    let d = frechet_distance(&curve, tau, 1e-9).value;
                    json!({ "distance": d, "threshold": t, "bound": t + slack, "within": d <= t + slack + 1e-9 })
                })
                .collect();
            let cells: Vec<CellBox> = report
                .config
                .iter()
                .flat_map(|c| c.anchors.iter().flatten())
                .map(|g| CellBox { lo: g.lo(), hi: g.hi() })
                .collect();
            if let Err(o) = write_svg(&a.svg, &curves, std::slice::from_ref(&curve), &cells) {
                return o;
            }
            Output {
                json: to_json(&json!({
                    "status": "curve",
                    "curve": coords(&curve),
                    "per_curve_distances": per_curve,
                    "vertex_count": report.l,
                    "search_nodes": report.nodes,
                    "seed": a.seed,
                    "normalization": norm,
                })),
                code: EXIT_OK,
            }
        }
        Ok(SolveOutcome::Null { nodes }) => {
            if let Err(o) = write_svg(&a.svg, &curves, &[], &[]) {
                return o;
            }
            Output {
                json: to_json(&json!({
                    "status": "null",
                    "per_curve_distances": [],
                    "search_nodes": nodes,
                    "seed": a.seed,
                    "normalization": norm,
                })),
                code: EXIT_NULL,
            }
        }
        Err(e) => core_failure(e),
    }
}

fn cluster(a: &ClusterArgs, normalize: bool, threads: usize) -> Output {
    let (curves, norm) = match load_all(&a.curves, normalize) {
        Ok(v) => v,
        Err(e) => return failure(e, EXIT_ERROR),
    };
    let overrides = FinderOverrides {
        sample_size: a.sample_size,
        subset_size: a.subset_size,
        max_subsets: a.max_subsets,
        max_w: a.max_w,
        threshold_factors: a.threshold_factors.clone(),
        node_budget: a.budget,
        max_searches: a.max_searches,
        threads,
        ..FinderOverrides::default()
    };
    let r = match kl_median(&curves, a.k, a.ell, a.mu, a.eps, a.seed, &overrides) {
        Ok(r) => r,
        Err(e) => return core_failure(e),
    };
    if let Err(o) = write_svg(&a.svg, &curves, &r.centers, &[]) {
        return o;
    }
    let brackets: Vec<_> = r
        .candidates
        .subsets
        .iter()
        .map(|s| json!({ "members": s.members, "cost": s.cost, "upper": s.upper, "lower": s.lower }))
        .collect();
    Output {
        json: to_json(&json!({
            "status": "centers",
            "centers": r.centers.iter().map(coords).collect::<Vec<_>>(),
            "cost": r.cost,
            "assignment": r.assignment,
            "provenance_flags": r.candidates.flags,
            "candidate_count": r.candidates.curves.len(),
            "searches": r.candidates.searches,
            "exhausted_searches": r.candidates.exhausted_searches,
            "subsets": brackets,
            "seed": a.seed,
            "normalization": norm,
        })),
        code: EXIT_OK,
    }
}
