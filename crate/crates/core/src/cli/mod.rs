//! The `hypk` command line: kernel tables, exit probabilities, simulation
//! runs and the validation suite.
//!
//! Exit statuses: 0 success, 1 usage or parameter error, 2 validation
//! failure, 3 too many truncated simulation paths.

mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use output::{fmt_f64, RunManifest};

use crate::exitprob;
use crate::geometry::{PolarPoint, SpherePoint};
use crate::kernels::{self, HnKernel, OuterRadius};
use crate::sim::{self, Execution, RunStatus, SimConfig};
use crate::specialfn::SeriesControl;
use crate::validate::{self, Budget, Suite};
use crate::Error;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_TRUNCATION: u8 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "HYPK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hypk", version, about = "Hitting laws of Brownian motion on hyperbolic spaces and the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a hitting density on an angle grid.
    Kernel(KernelArgs),
    /// Evaluate an annulus exit probability (or a hitting probability when
    /// --eta2 is omitted).
    Exit(ExitArgs),
    /// Simulate first hits of a ball or spherical cap.
    Simulate(SimulateArgs),
    /// Run the acceptance checks and print a JSON report.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelModel {
    H2,
    Hn,
    D2,
    Sphere,
    H2Boundary,
    Cauchy,
    EuclideanNd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub model: KernelModel,
    /// Dimension for hn and euclidean-nd.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eta_bar: Option<f64>,
    /// Disc radius (d2), or radius ratio ρ for euclidean-nd.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub r_bar: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub theta_bar: Option<f64>,
    /// Start point of the cauchy model.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    /// Half-width of the boundary abscissa range for the cauchy model.
    #[arg(long, default_value_t = 10.0)]
    pub span: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    H2,
    Hn,
    D2,
    Sphere,
    Euclidean,
}

#[derive(Debug, Args, Serialize)]
pub struct ExitArgs {
    #[arg(long, value_enum)]
    pub geometry: Geometry,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Radius of the target reached first (disc radius for d2, colatitude
    /// for sphere).
    #[arg(long)]
    pub eta1: f64,
    /// Start radius.
    #[arg(long)]
    pub eta: f64,
    /// Other boundary radius; omit for the hitting probability.
    #[arg(long)]
    pub eta2: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimModel {
    H2,
    Hn,
    Sphere,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: SimModel,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eta_bar: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub theta_bar: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    /// Largest adaptive step far from the target; fixed steps when absent.
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 50_000_000)]
    pub max_steps: u64,
    /// Run paths on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteArg {
    Kernels,
    Exits,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    /// Use a tenth of the acceptance path counts.
    #[arg(long)]
    pub fast: bool,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Library(Error::Truncated { .. }) => EXIT_TRUNCATION,
            _ => EXIT_USAGE,
        }
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, model: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for {model}")))
}

/// Parses `args` and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("{THREADS_VAR} must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be a positive integer, got 0"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> Result<(), String> {
    Ok(())
}

pub fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Kernel(a) => cmd_kernel(&a),
        Command::Exit(a) => cmd_exit(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Validate(a) => cmd_validate(&a),
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    // The last point is pinned to `hi` so rounding cannot push it outside.
    (0..points)
        .map(|i| if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
        .collect()
}

/// One tabulated point: angle (or boundary abscissa), density and the
/// series truncation bound where one applies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelRow {
    pub angle: f64,
    pub density: f64,
    pub truncation_bound: Option<f64>,
}

pub fn kernel_rows(a: &KernelArgs) -> Result<Vec<KernelRow>, CliError> {
    if a.grid < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {}", a.grid)));
    }
    let m = format!("--model {}", a.model.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default());
    let closed = |angles: Vec<f64>, f: &dyn Fn(f64) -> crate::Result<f64>| -> Result<Vec<KernelRow>, CliError> {
        angles
            .into_iter()
            .map(|t| {
                Ok(KernelRow {
                    angle: t,
                    density: f(t)?,
                    truncation_bound: None,
                })
            })
            .collect()
    };
    let periodic = grid(-PI, PI, a.grid);
    let half = grid(0.0, PI, a.grid);
    match a.model {
        KernelModel::H2 => {
            let (e, eb) = (need(a.eta, "eta", &m)?, need(a.eta_bar, "eta-bar", &m)?);
            closed(periodic, &|t| kernels::poisson_h2(e, t, eb))
        }
        KernelModel::H2Boundary => {
            let e = need(a.eta, "eta", &m)?;
            closed(periodic, &|t| kernels::poisson_h2_boundary(e, t))
        }
        KernelModel::D2 => {
            let (r, rb) = (need(a.r, "r", &m)?, need(a.r_bar, "r-bar", &m)?);
            closed(periodic, &|t| kernels::poisson_d2(r, t, rb))
        }
        KernelModel::Sphere => {
            let (t0, tb) = (need(a.theta, "theta", &m)?, need(a.theta_bar, "theta-bar", &m)?);
            closed(periodic, &|t| kernels::poisson_sphere(t0, t, tb))
        }
        KernelModel::Cauchy => {
            let (x, y) = (need(a.x, "x", &m)?, need(a.y, "y", &m)?);
            if a.span.is_nan() || a.span <= 0.0 {
                return Err(CliError::Usage(format!("--span must be > 0, got {}", a.span)));
            }
            closed(grid(x - a.span, x + a.span, a.grid), &|t| kernels::cauchy_hitting_density(x, y, t))
        }
        KernelModel::EuclideanNd => {
            let (n, rho) = (need(a.dim, "dim", &m)?, need(a.r, "r", &m)?);
            closed(half, &|t| kernels::euclidean_poisson_nd(n, rho, t))
        }
        KernelModel::Hn => {
            let (n, e, eb) = (need(a.dim, "dim", &m)?, need(a.eta, "eta", &m)?, need(a.eta_bar, "eta-bar", &m)?);
            if n == 2 {
                return Err(CliError::Usage("--model hn needs --dim >= 3; use --model h2 for the plane".into()));
            }
            let k = HnKernel::new(n, e, OuterRadius::Finite(eb), SeriesControl::default())?;
            half.into_iter()
                .map(|t| {
                    let ev = k.evaluate(t)?;
                    Ok(KernelRow {
                        angle: t,
                        density: ev.density,
                        truncation_bound: Some(ev.truncation_error_bound),
                    })
                })
                .collect()
        }
    }
}

fn cmd_kernel(a: &KernelArgs) -> Result<u8, CliError> {
    let rows = kernel_rows(a)?;
    let out = output::sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => output::write_csv(
            out,
            &["angle", "density", "truncation_bound"],
            rows.iter().map(|r| {
                vec![
                    fmt_f64(r.angle),
                    fmt_f64(r.density),
                    r.truncation_bound.map(fmt_f64).unwrap_or_default(),
                ]
            }),
        )?,
        Format::Json => output::write_json(out, &rows)?,
    }
    if let Some(p) = &a.out {
        RunManifest::new("kernel", a, None).write_beside(p)?;
    }
    Ok(0)
}

/// JSON record of `hypk exit`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitRecord {
    pub geometry: Geometry,
    pub n: usize,
    pub eta1: f64,
    pub eta: f64,
    pub eta2: Option<f64>,
    pub probability: f64,
}

pub fn exit_record(a: &ExitArgs) -> Result<ExitRecord, CliError> {
    let n = match a.geometry {
        Geometry::H2 | Geometry::D2 | Geometry::Sphere => {
            if let Some(d) = a.dim.filter(|&d| d != 2) {
                return Err(CliError::Usage(format!("this geometry is two-dimensional, got --dim {d}")));
            }
            2
        }
        Geometry::Hn | Geometry::Euclidean => need(a.dim, "dim", "this geometry")?,
    };
    let p = match (a.geometry, a.eta2) {
        (Geometry::H2, Some(e2)) => exitprob::exit_prob_h2(a.eta, a.eta1, e2)?,
        (Geometry::H2, None) => exitprob::hit_prob_h2(a.eta, a.eta1)?,
        (Geometry::Hn, Some(e2)) => exitprob::exit_prob_hn(n, a.eta, a.eta1, e2)?,
        (Geometry::Hn, None) => exitprob::hit_prob_hn(n, a.eta, a.eta1)?,
        (Geometry::D2, Some(e2)) => exitprob::exit_prob_d2(a.eta, a.eta1, e2)?,
        (Geometry::D2, None) => exitprob::hit_prob_d2(a.eta, a.eta1)?,
        (Geometry::Sphere, Some(e2)) => exitprob::exit_prob_sphere(a.eta, a.eta1, e2)?,
        (Geometry::Euclidean, Some(e2)) => exitprob::exit_prob_euclidean(n, a.eta, a.eta1, e2)?,
        (Geometry::Euclidean, None) => exitprob::hit_prob_euclidean(n, a.eta, a.eta1)?,
        (Geometry::Sphere, None) => {
            return Err(CliError::Usage("--eta2 is required for the sphere, whose paths are recurrent".into()))
        }
    };
    Ok(ExitRecord {
        geometry: a.geometry,
        n,
        eta1: a.eta1,
        eta: a.eta,
        eta2: a.eta2,
        probability: p,
    })
}

fn cmd_exit(a: &ExitArgs) -> Result<u8, CliError> {
    let rec = exit_record(a)?;
    output::write_json(output::sink(a.out.as_deref())?, &rec)?;
    if let Some(p) = &a.out {
        RunManifest::new("exit", a, None).write_beside(p)?;
    }
    Ok(0)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<u8, CliError> {
    let exec = if a.sequential { Execution::Sequential } else { Execution::Parallel };
    let m = "simulate";
    let (header, rows, truncated): (&[&str], Vec<Vec<String>>, usize) = match a.model {
        SimModel::H2 | SimModel::Hn => {
            let n = if a.model == SimModel::H2 { 2 } else { need(a.dim, "dim", m)? };
            let mut cfg = SimConfig::new(n, a.step, a.paths, a.seed)?.with_max_steps(a.max_steps)?;
            if let Some(ms) = a.max_step {
                cfg = cfg.with_adaptive_step(ms)?;
            }
            let start = PolarPoint::new(need(a.eta, "eta", m)?, vec![0.0; n - 1])?;
            let batch = sim::first_hit_sphere_batch(&cfg, &start, need(a.eta_bar, "eta-bar", m)?, exec)?;
            let rows = batch
                .samples
                .iter()
                .map(|s| {
                    vec![
                        s.signed_angle.map(fmt_f64).unwrap_or_default(),
                        fmt_f64(s.psi),
                        s.steps_taken.to_string(),
                        fmt_f64(s.overshoot),
                    ]
                })
                .collect();
            (&["alpha", "psi", "steps", "overshoot"], rows, batch.truncated.len())
        }
        SimModel::Sphere => {
            let cfg = SimConfig::new(2, a.step, a.paths, a.seed)?.with_max_steps(a.max_steps)?;
            let cfg = match a.max_step {
                Some(ms) => cfg.with_adaptive_step(ms)?,
                None => cfg,
            };
            let start = SpherePoint::new(need(a.theta, "theta", m)?, 0.0)?;
            let batch = sim::first_hit_spherical_circle_batch(&cfg, &start, need(a.theta_bar, "theta-bar", m)?, exec)?;
            let rows = batch
                .samples
                .iter()
                .map(|s| vec![fmt_f64(s.dphi), s.steps_taken.to_string(), fmt_f64(s.overshoot)])
                .collect();
            (&["dphi", "steps", "overshoot"], rows, batch.truncated.len())
        }
    };
    output::write_csv(output::sink(a.out.as_deref())?, header, rows)?;
    if let Some(p) = &a.out {
        RunManifest::new("simulate", a, Some(a.seed)).write_beside(p)?;
    }
    if RunStatus::from_truncated(truncated as u64, a.paths) != RunStatus::Ok {
        eprintln!(
            "error: {truncated} of {} paths hit --max-steps {} (limit {:.1}%)",
            a.paths,
            a.max_steps,
            100.0 * sim::TRUNCATION_WARNING_FRACTION
        );
        return Ok(EXIT_TRUNCATION);
    }
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs) -> Result<u8, CliError> {
    let mut budget = if a.fast { Budget::fast(a.seed) } else { Budget::full(a.seed) };
    if a.sequential {
        budget.exec = Execution::Sequential;
    }
    let suite = match a.suite {
        SuiteArg::Kernels => Suite::Kernels,
        SuiteArg::Exits => Suite::Exits,
        SuiteArg::All => Suite::All,
    };
    let report = validate::run_suite(suite, &budget);
    for c in &report.checks {
        eprintln!("{}", c.line());
    }
    output::write_json(output::sink(a.out.as_deref())?, &report)?;
    if let Some(p) = &a.out {
        RunManifest::new("validate", a, Some(a.seed)).write_beside(p)?;
    }
    Ok(if report.passed { 0 } else { EXIT_VALIDATION })
}
