//! The `suprec` command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use suprec_core::boundaries::{detection_boundary, non_udd_boundary, strong_boundary, weak_boundary};
use suprec_core::diagnostics::{gamma_packing, udd_count};
use suprec_core::linalg::Matrix;
use suprec_core::noise::{covariance_of, MAX_DENSE_DIM};
use suprec_core::{NoiseModel, TailFamily};

use crate::error::{Error, Result};
use crate::experiments::{
    fmt_sig, pareto_experiment, run_grid, stability_experiment, GridSpec, ParetoSpec,
};
use crate::io::{load_spec, manifest_path, read_matrix_csv, write_json, write_text, Manifest};

#[derive(Debug, Parser)]
#[command(name = "suprec", version, about = "Phase transitions for exact support recovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit strong, weak, detection and non-UDD boundary curves as CSV.
    Boundary(BoundaryArgs),
    /// Run a (beta, r) grid and write a CSV plus a run manifest.
    Simulate(SimulateArgs),
    /// Quantiles and upper quantiles of a tail family.
    Quantile(QuantileArgs),
    /// Covariance exceedance counts N_p(delta) and greedy packings.
    CheckUdd(CheckUddArgs),
    /// Distribution of max_{j in S} eps(j) / u_|S| over replicates.
    Stability(StabilityArgs),
    /// Oracle recovery under Pareto noise against its Fréchet limit.
    Pareto(ParetoArgs),
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    /// Tail shape nu.
    #[arg(long, default_value_t = 2.0)]
    pub nu: f64,
    /// Number of beta values, at beta = i / points for i = 1..=points.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; all available when absent.
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// GridSpec JSON, or a manifest from an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    /// No per-cell progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct QuantileArgs {
    /// Family: gaussian, laplace, gg:NU, agg:NU, heavier:GAMMA[,C],
    /// lighter:NU or pareto:ALPHA.
    pub family: String,
    /// Lower-tail probability q, for F←(q).
    #[arg(long, conflicts_with_all = ["upper_p", "tail"])]
    pub q: Option<f64>,
    /// Dimension p, for u_p = F←(1 - 1/p).
    #[arg(long, conflicts_with = "tail")]
    pub upper_p: Option<f64>,
    /// Upper-tail probability, for F←(1 - tail).
    #[arg(long)]
    pub tail: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CheckUddArgs {
    /// Noise model: iid, ar1:RHO, fgn:H, block:BETA.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    pub model: Option<String>,
    /// Correlation matrix as headerless CSV.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Dimension for --model.
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Comma-separated thresholds in (0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,0.75,0.9")]
    pub delta: Vec<f64>,
    /// Also list the greedy packing (0-based indices) for each delta.
    #[arg(long)]
    pub packing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Noise model: iid, ar1:RHO, fgn:H, block:BETA.
    #[arg(long, default_value = "iid")]
    pub model: String,
    /// Marginal family, used by iid noise and for the normalizer.
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    /// Size of the random subset S; p when absent.
    #[arg(long)]
    pub subset_size: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
    /// JSON summary; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    /// ParetoSpec JSON, or a manifest from an earlier run.
    #[arg(long, conflicts_with_all = ["alpha", "f", "r"])]
    pub config: Option<PathBuf>,
    /// Pareto tail index.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Signal fraction.
    #[arg(long, default_value_t = 0.5)]
    pub f: f64,
    /// Signal size coefficient r*.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Draws for the Fréchet limit; --reps when absent.
    #[arg(long)]
    pub limit_reps: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
    /// JSON result plus `<out>.manifest.json`; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("suprec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Boundary(a) => boundary(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Quantile(a) => quantile(&a),
        Command::CheckUdd(a) => check_udd(&a),
        Command::Stability(a) => stability(&a),
        Command::Pareto(a) => pareto(&a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn boundary_csv(nu: f64, points: usize) -> Result<String> {
    if points == 0 {
        return Err(config("points must be at least 1"));
    }
    let mut out = String::from("beta,g,h,f,nonudd\n");
    for i in 1..=points {
        let beta = i as f64 / points as f64;
        let g = strong_boundary(beta, nu)?;
        let h = weak_boundary(beta)?;
        let f = if nu == 2.0 && beta > 0.5 {
            fmt_sig(detection_boundary(beta)?)
        } else {
            String::new()
        };
        let nonudd = non_udd_boundary(beta)?;
        let _ = writeln!(out, "{},{},{},{},{}", fmt_sig(beta), fmt_sig(g), fmt_sig(h), f, fmt_sig(nonudd));
    }
    Ok(out)
}

fn boundary(a: &BoundaryArgs) -> Result<()> {
    emit(a.out.as_deref(), &boundary_csv(a.nu, a.points)?)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let mut spec: GridSpec = load_spec(&a.config)?;
    if let Some(seed) = a.run.seed {
        spec.seed = seed;
    }
    if let Some(reps) = a.run.reps {
        spec.reps = reps;
    }
    if let Some(p) = a.run.p {
        spec.p = p;
    }
    spec.validate()?;
    let start = Instant::now();
    let quiet = a.quiet;
    let progress = move |done: usize, total: usize| {
        if !quiet {
            eprintln!("cell {done}/{total}");
        }
    };
    let result = run_grid(&spec, a.run.parallelism, Some(&progress))?;
    write_text(&a.out, &result.to_csv())?;
    let wall = start.elapsed().as_secs_f64();
    let seed = spec.seed;
    let manifest = Manifest::new("simulate", seed, spec, &a.out, wall, a.run.parallelism);
    write_json(&manifest_path(&a.out), &manifest)
}

fn number(field: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| config(format!("{field}: '{text}' is not a number")))
}

/// Parses `gaussian`, `laplace`, `gg:NU`, `agg:NU`, `heavier:GAMMA[,C]`,
/// `lighter:NU` and `pareto:ALPHA`.
pub fn parse_family(text: &str) -> Result<TailFamily> {
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (text, None),
    };
    let need = |what: &str| arg.ok_or_else(|| config(format!("family '{name}' needs {what}, e.g. {name}:2")));
    let fam = match name.trim().to_ascii_lowercase().as_str() {
        "gaussian" | "normal" => TailFamily::Gaussian,
        "laplace" => TailFamily::Laplace,
        "gg" => TailFamily::GeneralizedGaussian { nu: number("nu", need("nu")?)? },
        "agg" => TailFamily::AggAsymptotic { nu: number("nu", need("nu")?)? },
        "lighter" => TailFamily::LighterThanAgg { nu: number("nu", need("nu")?)? },
        "pareto" => TailFamily::Pareto { tail_index: number("alpha", need("alpha")?)? },
        "heavier" => {
            let arg = need("gamma")?;
            let (g, c) = arg.split_once(',').unwrap_or((arg, "1"));
            TailFamily::HeavierThanAgg { gamma: number("gamma", g)?, c: number("c", c)? }
        }
        other => return Err(config(format!("unknown family '{other}'"))),
    };
    if arg.is_some() && matches!(fam, TailFamily::Gaussian | TailFamily::Laplace) {
        return Err(config(format!("family '{name}' takes no parameter")));
    }
    fam.validate()?;
    Ok(fam)
}

/// Parses `iid[:FAMILY]`, `ar1:RHO`, `fgn:H` and `block:BETA`.
pub fn parse_model(text: &str, family: TailFamily) -> Result<NoiseModel> {
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (text, None),
    };
    let need = || arg.ok_or_else(|| config(format!("model '{name}' needs a parameter, e.g. {name}:0.5")));
    let model = match name.trim().to_ascii_lowercase().as_str() {
        "iid" => NoiseModel::Iid(match arg {
            Some(f) => parse_family(f)?,
            None => family,
        }),
        "ar1" => NoiseModel::Ar1 { rho: number("rho", need()?)? },
        "fgn" => NoiseModel::Fgn { hurst: number("hurst", need()?)? },
        "block" => NoiseModel::BlockEquicorrelated { beta: number("beta", need()?)? },
        other => return Err(config(format!("unknown noise model '{other}'"))),
    };
    model.validate()?;
    Ok(model)
}

fn quantile(a: &QuantileArgs) -> Result<()> {
    let fam = parse_family(&a.family)?;
    let mut out = String::new();
    match (a.q, a.upper_p, a.tail) {
        (Some(q), None, None) => {
            let _ = writeln!(out, "{}", fam.quantile(q)?);
        }
        (None, Some(p), None) => {
            if p.is_nan() || p <= 1.0 {
                return Err(config(format!("--upper-p must exceed 1, got {p}")));
            }
            let _ = writeln!(out, "u_p {}", fam.upper_quantile(1.0 / p)?);
            if let Some(nu) = fam.agg_shape() {
                let _ = writeln!(out, "asymptotic {}", (nu * p.ln()).powf(1.0 / nu));
            }
        }
        (None, None, Some(t)) => {
            let _ = writeln!(out, "{}", fam.upper_quantile(t)?);
        }
        _ => return Err(config("give exactly one of --q, --upper-p, --tail")),
    }
    emit(None, &out)
}

fn check_udd(a: &CheckUddArgs) -> Result<()> {
    let sigma = match (&a.model, &a.matrix) {
        (_, Some(path)) => {
            let m = Matrix::from_rows(&read_matrix_csv(path)?)?;
            m.check_correlation(1e-10)?;
            m
        }
        (Some(spec), None) => {
            if a.p > MAX_DENSE_DIM {
                return Err(config(format!("p = {} exceeds {MAX_DENSE_DIM}", a.p)));
            }
            covariance_of(&parse_model(spec, TailFamily::Gaussian)?, a.p)?
        }
        (None, None) => return Err(config("give --model or --matrix")),
    };
    let mut out = String::from(if a.packing {
        "delta,n_p,n_delta,packing_size,packing\n"
    } else {
        "delta,n_p,n_delta,packing_size\n"
    });
    for &d in &a.delta {
        let n = udd_count(&sigma, d)?;
        let pk = gamma_packing(&sigma, d)?;
        let _ = write!(out, "{},{},{},{}", fmt_sig(d), n, n + 1, pk.len());
        if a.packing {
            let list: Vec<String> = pk.iter().map(|j| j.to_string()).collect();
            let _ = write!(out, ",{}", list.join(" "));
        }
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}

fn stability(a: &StabilityArgs) -> Result<()> {
    let family = parse_family(&a.family)?;
    let model = parse_model(&a.model, family)?;
    let p = a.run.p.unwrap_or(10_000);
    let reps = a.run.reps.unwrap_or(200);
    let res = stability_experiment(
        &model,
        &family,
        p,
        a.subset_size.unwrap_or(p),
        reps,
        a.run.seed.unwrap_or(0),
        a.run.parallelism,
    )?;
    let mut text = serde_json::to_string_pretty(&res).expect("result serializes");
    text.push('\n');
    emit(a.out.as_deref(), &text)
}

fn pareto(a: &ParetoArgs) -> Result<()> {
    let mut spec = match &a.config {
        Some(path) => load_spec::<ParetoSpec>(path)?,
        None => ParetoSpec {
            p: 10_000,
            alpha_tail: a.alpha,
            f: a.f,
            r: a.r,
            reps: 5000,
            limit_reps: a.limit_reps,
            seed: 0,
        },
    };
    if let Some(seed) = a.run.seed {
        spec.seed = seed;
    }
    if let Some(reps) = a.run.reps {
        spec.reps = reps;
    }
    if let Some(p) = a.run.p {
        spec.p = p;
    }
    if a.limit_reps.is_some() {
        spec.limit_reps = a.limit_reps;
    }
    spec.validate()?;
    let start = Instant::now();
    let res = pareto_experiment(&spec, a.run.parallelism)?;
    let mut text = serde_json::to_string_pretty(&res).expect("result serializes");
    text.push('\n');
    match &a.out {
        Some(out) => {
            write_text(out, &text)?;
            let wall = start.elapsed().as_secs_f64();
            let manifest = Manifest::new("pareto", spec.seed, spec, out, wall, a.run.parallelism);
            write_json(&manifest_path(out), &manifest)
        }
        None => emit(None, &text),
    }
}
