//! Command-line front end. Every command can also be driven by a JSON run
//! config `{"command": ..., "parameters": {...}, "out": ..., "format": ...}`
//! whose parameter names match the long flags.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fsde::{assumption_checker, run_scenario, FsdeSpec, Scenario};
use crate::gauss_aw::{continuous_aw_fbm, continuous_aw_multi, continuous_aw_unit, discrete_aw, CovMatrix, DistanceReport};
use crate::kernels::{FouConvention, GaussianProcessSpec, KernelKind, VolterraKernel};
use crate::mart_approx::mart_approx_distance;
use crate::oracles::regenerate_goldens;
use crate::quadrature::{QuadratureGrid, Scheme};

/// Exit status for invalid input.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    #[default]
    Midpoint,
    GaussLegendre,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Midpoint => Scheme::GradedMidpoint,
            SchemeArg::GaussLegendre => Scheme::GradedGaussLegendre,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true, default_value_t)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Quadrature nodes per integral direction.
    #[arg(long, global = true, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, value_enum, global = true, default_value_t)]
    pub scheme: SchemeArg,
    /// Recompute with the other scheme and fail above this relative disagreement.
    #[arg(long, global = true)]
    pub crosscheck_tol: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true, env = "AWGAUSS_THREADS")]
    pub threads: Option<usize>,
}

impl Default for Common {
    fn default() -> Self {
        Self {
            out: None,
            format: Format::Json,
            seed: 1,
            grid: 256,
            scheme: SchemeArg::Midpoint,
            crosscheck_tol: None,
            threads: None,
        }
    }
}

impl Common {
    fn quadrature(&self) -> Result<QuadratureGrid> {
        let grid = QuadratureGrid {
            scheme: self.scheme.into(),
            crosscheck_tol: self.crosscheck_tol,
            ..QuadratureGrid::with_nodes(self.grid, self.grid)
        };
        grid.validate()?;
        Ok(grid)
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AwFbmArgs {
    #[arg(long)]
    #[serde(default)]
    pub h1: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub h2: Option<f64>,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T", default = "one")]
    pub horizon: f64,
    /// Emit `H1,H2,aw_squared` over a square grid of Hurst pairs.
    #[arg(long)]
    #[serde(default)]
    pub sweep: bool,
    #[arg(long, default_value_t = 0.05)]
    #[serde(default = "sweep_min")]
    pub sweep_min: f64,
    #[arg(long, default_value_t = 0.95)]
    #[serde(default = "sweep_max")]
    pub sweep_max: f64,
    #[arg(long, default_value_t = 19)]
    #[serde(default = "sweep_steps")]
    pub sweep_steps: usize,
}

fn sweep_min() -> f64 {
    0.05
}
fn sweep_max() -> f64 {
    0.95
}
fn sweep_steps() -> usize {
    19
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AwDiscreteArgs {
    /// CSV covariance matrix without header.
    #[arg(long)]
    pub cov1: PathBuf,
    #[arg(long)]
    pub cov2: PathBuf,
}

/// Two processes, from JSON spec files or from Hurst parameters
/// (fBM `h1` against fBM `h2`, or against fOU `h2` when `lambda` is set).
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecPairArgs {
    #[arg(long)]
    #[serde(default)]
    pub spec1: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub spec2: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub h1: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub h2: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub lambda: Option<f64>,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T", default = "one")]
    pub horizon: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartArgs {
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub hurst: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T", default = "one")]
    pub horizon: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Where to write `path_id,t,x1,x2` for the first paths.
    #[arg(long)]
    #[serde(default)]
    pub paths_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckArgs {
    /// FsdeSpec JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, requires = "state_hi")]
    #[serde(default)]
    pub state_lo: Option<f64>,
    #[arg(long, requires = "state_lo")]
    #[serde(default)]
    pub state_hi: Option<f64>,
    #[arg(long, default_value_t = 101)]
    #[serde(default = "points")]
    pub points: usize,
}

fn points() -> usize {
    101
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RegenArgs {}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum Command {
    /// Adapted distance between two fractional Brownian motions.
    AwFbm(AwFbmArgs),
    /// Adapted distance between two discrete Gaussian vectors.
    AwDiscrete(AwDiscreteArgs),
    /// Unit-multiplicity formula.
    AwUnit(SpecPairArgs),
    /// Higher-multiplicity formula.
    AwMulti(SpecPairArgs),
    /// Best martingale approximation of an fBM.
    MartApprox(MartArgs),
    /// Monte Carlo coupling costs of an fSDE scenario.
    Simulate(SimulateArgs),
    /// Coefficient and kernel assumption report.
    CheckAssumptions(CheckArgs),
    /// Re-derive every golden value; writes the registry to --out.
    RegenGoldens(RegenArgs),
}

#[derive(Debug, Parser)]
#[command(name = "awgauss", version, about = "Adapted Wasserstein distances between Gaussian Volterra processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// JSON run config used instead of a subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Deserialize)]
struct RunConfig {
    command: String,
    #[serde(default)]
    parameters: Value,
    #[serde(flatten)]
    common: Common,
}

/// Parses a JSON run config.
pub fn parse_run_config(text: &str) -> Result<(Command, Common)> {
    let rc: RunConfig = serde_json::from_str(text)?;
    let params = if rc.parameters.is_null() { json!({}) } else { rc.parameters };
    let cmd: Command = serde_json::from_value(json!({"command": rc.command, "parameters": params}))?;
    Ok((cmd, rc.common))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn load_spec(path: &Path) -> Result<GaussianProcessSpec> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn spec_pair(a: &SpecPairArgs) -> Result<(GaussianProcessSpec, GaussianProcessSpec)> {
    match (&a.spec1, &a.spec2, a.h1, a.h2) {
        (Some(p1), Some(p2), None, None) => Ok((load_spec(p1)?, load_spec(p2)?)),
        (None, None, Some(h1), Some(h2)) => {
            let first = GaussianProcessSpec::fbm(h1, a.horizon)?;
            let second = match a.lambda {
                None => GaussianProcessSpec::fbm(h2, a.horizon)?,
                Some(lambda) => GaussianProcessSpec::unit(VolterraKernel::new(
                    KernelKind::FractionalOu {
                        hurst: h2,
                        lambda,
                        base: Default::default(),
                        convention: FouConvention::MildSolution,
                        quad_nodes: 64,
                    },
                    a.horizon,
                )?),
            };
            Ok((first, second))
        }
        _ => Err(Error::Invalid("give either --spec1 and --spec2, or --h1 and --h2".into())),
    }
}

fn distance_csv(r: &DistanceReport) -> String {
    format!(
        "distance_squared,trace_term,cross_term\n{},{},{}\n",
        num(r.distance_squared),
        num(r.trace_term),
        num(r.cross_term)
    )
}

/// What a command writes: the main artifact plus optional side files.
pub struct Artifact {
    pub body: String,
    pub side_files: Vec<(PathBuf, String)>,
}

fn artifact(body: String) -> Artifact {
    Artifact {
        body,
        side_files: Vec::new(),
    }
}

fn json_body<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn distance_artifact(r: &DistanceReport, format: Format) -> Result<Artifact> {
    Ok(artifact(match format {
        Format::Json => json_body(r)?,
        Format::Csv => distance_csv(r),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "H1")]
    pub h1: f64,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub aw_squared: f64,
}

fn fbm_sweep(a: &AwFbmArgs, grid: &QuadratureGrid) -> Result<Vec<SweepPoint>> {
    if a.sweep_steps < 2 || !(a.sweep_min > 0.0 && a.sweep_max < 1.0 && a.sweep_min < a.sweep_max) {
        return Err(Error::Invalid("sweep needs 0 < min < max < 1 and at least two steps".into()));
    }
    let hs: Vec<f64> = (0..a.sweep_steps)
        .map(|i| a.sweep_min + (a.sweep_max - a.sweep_min) * i as f64 / (a.sweep_steps - 1) as f64)
        .collect();
    let mut out = Vec::with_capacity(hs.len() * hs.len());
    for &h1 in &hs {
        for &h2 in &hs {
            let v = if h1 == h2 {
                0.0
            } else {
                continuous_aw_fbm(h1, h2, a.horizon, grid)?.distance_squared
            };
            out.push(SweepPoint { h1, h2, aw_squared: v });
        }
    }
    Ok(out)
}

/// Runs one command and returns what it would write.
pub fn execute(cmd: &Command, common: &Common) -> Result<Artifact> {
    let csv_unsupported = |what: &str| Error::Invalid(format!("{what} has no CSV form"));
    match cmd {
        Command::AwFbm(a) => {
            let grid = common.quadrature()?;
            if a.sweep {
                let pts = fbm_sweep(a, &grid)?;
                return Ok(artifact(match common.format {
                    Format::Json => json_body(&pts)?,
                    Format::Csv => {
                        let mut s = String::from("H1,H2,aw_squared\n");
                        for p in &pts {
                            let _ = writeln!(s, "{},{},{}", num(p.h1), num(p.h2), num(p.aw_squared));
                        }
                        s
                    }
                }));
            }
            let (h1, h2) = match (a.h1, a.h2) {
                (Some(h1), Some(h2)) => (h1, h2),
                _ => return Err(Error::Invalid("aw-fbm needs --h1 and --h2 (or --sweep)".into())),
            };
            distance_artifact(&continuous_aw_fbm(h1, h2, a.horizon, &grid)?, common.format)
        }
        Command::AwDiscrete(a) => {
            // the matrices are user input here, so a failed factorisation is a validation error
            let r = discrete_aw(&CovMatrix::from_csv_path(&a.cov1)?, &CovMatrix::from_csv_path(&a.cov2)?).map_err(|e| match e {
                Error::NotPositiveDefinite { .. } => Error::Invalid(e.to_string()),
                e => e,
            })?;
            distance_artifact(&r, common.format)
        }
        Command::AwUnit(a) => {
            let grid = common.quadrature()?;
            let (s1, s2) = spec_pair(a)?;
            distance_artifact(&continuous_aw_unit(&s1, &s2, &grid)?, common.format)
        }
        Command::AwMulti(a) => {
            let grid = common.quadrature()?;
            let (s1, s2) = spec_pair(a)?;
            distance_artifact(&continuous_aw_multi(&s1, &s2, &grid)?, common.format)
        }
        Command::MartApprox(a) => {
            let grid = common.quadrature()?;
            let r = mart_approx_distance(a.hurst, a.horizon, &grid)?;
            Ok(artifact(match common.format {
                Format::Json => json_body(&r)?,
                Format::Csv => {
                    let mut s = String::from("r,rho\n");
                    for (r, rho) in r.r.iter().zip(&r.rho) {
                        let _ = writeln!(s, "{},{}", num(*r), num(*rho));
                    }
                    s
                }
            }))
        }
        Command::Simulate(a) => {
            let sc = Scenario::from_json(&std::fs::read_to_string(&a.scenario)?)?;
            let out = run_scenario(&sc)?;
            let body = match common.format {
                Format::Json => json_body(&out.estimates)?,
                Format::Csv => {
                    let mut s = String::from("control,mean,std_error,n_paths\n");
                    for e in &out.estimates {
                        let _ = writeln!(s, "{},{},{},{}", e.control.label(), num(e.mean), num(e.std_error), e.n_paths);
                    }
                    s
                }
            };
            let mut art = artifact(body);
            if let Some(p) = &a.paths_csv {
                art.side_files.push((p.clone(), out.path_csv));
            }
            Ok(art)
        }
        Command::CheckAssumptions(a) => {
            let spec: FsdeSpec = serde_json::from_str(&std::fs::read_to_string(&a.spec)?)?;
            let range = a.state_lo.zip(a.state_hi);
            let report = assumption_checker(&spec, range, a.points);
            Ok(artifact(match common.format {
                Format::Json => json_body(&report)?,
                Format::Csv => {
                    let mut s = String::from("name,pass,worst,witness\n");
                    for c in &report.checks {
                        let w: Vec<String> = c.witness.iter().map(|v| num(*v)).collect();
                        let _ = writeln!(s, "{},{},{},{}", c.name, c.pass, num(c.worst), w.join(" "));
                    }
                    s
                }
            }))
        }
        Command::RegenGoldens(_) => {
            if common.format == Format::Csv {
                return Err(csv_unsupported("regen-goldens"));
            }
            Ok(artifact(json_body(&regenerate_goldens()?)?))
        }
    }
}

fn write_out(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Executes the parsed command line and writes its artifacts.
pub fn run(cli: Cli) -> Result<()> {
    let (cmd, common) = match (cli.config, cli.command) {
        (Some(path), None) => parse_run_config(&std::fs::read_to_string(path)?)?,
        (None, Some(cmd)) => (cmd, cli.common),
        (Some(_), Some(_)) => return Err(Error::Invalid("give either --config or a subcommand, not both".into())),
        (None, None) => return Err(Error::Invalid("no command given (see --help)".into())),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Invalid("--threads must be positive".into()));
        }
        // a global pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let art = execute(&cmd, &common)?;
    for (p, body) in &art.side_files {
        std::fs::write(p, body)?;
    }
    write_out(common.out.as_deref(), &art.body)
}

/// Process entry point: parses `std::env::args`, returns the exit status.
pub fn main_exit_code() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}
