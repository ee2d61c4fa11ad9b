use std::fmt;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use steklov_core::harmonics::HarmonicIndex;
use steklov_core::perturbation::PerturbationFunction;
use steklov_core::quadrature::{node_cap_from_env, NODE_CAP_ENV};
use steklov_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Malformed input: exit code 2.
    Parse(String),
    /// Numerical contract violation: exit code 3.
    Numerical(String),
    /// A verification suite reported a failure: exit code 1.
    VerifyFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Parse(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::VerifyFailed => write!(f, "verification failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::InvalidIndex(_) | Error::InvalidPoint(_) | Error::InvalidPerturbation(_) => CliError::Parse(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "First-order Steklov eigenvalue asymptotics on nearly hyperspherical domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigen-decomposition of the first-order matrix as JSON.
    Spectrum(MatrixArgs),
    /// The first-order matrix itself as JSON.
    Matrix(MatrixArgs),
    /// CSV table of first-order eigenvalues for one or more clusters.
    Table(TableArgs),
    /// Run a named invariant suite.
    Verify(VerifyArgs),
    /// Compare central-difference slopes of the direct solve with the matrix spectrum.
    OracleSlope(OracleArgs),
    /// Exact factor breakdown of the p = 2k + 2 xi triple integral.
    DiagnoseP2k(DiagnoseArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteArg {
    Wigner,
    Quadrature,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Trace,
    Addition,
    Wigner,
    Parity,
    CrossRoute,
    Oracle,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Sphere dimension d (defaults to the dimension in the rho file).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Quadrature node cap (overrides STEKLOV_NODE_CAP).
    #[arg(long = "node-cap")]
    pub node_cap: Option<u128>,
}

#[derive(Args, Debug)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub k: u32,
    /// Perturbation JSON file.
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long, value_enum, default_value = "wigner")]
    pub route: RouteArg,
    /// Grid degree for the quadrature route.
    #[arg(long = "quad-degree")]
    pub quad_degree: Option<usize>,
    /// Cross-route tolerance for `--route both`.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    /// Single cluster degree.
    #[arg(long, conflicts_with = "kmax")]
    pub k: Option<u32>,
    /// Emit clusters 1..=kmax.
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long, value_enum, default_value = "wigner")]
    pub route: RouteArg,
    #[arg(long = "quad-degree")]
    pub quad_degree: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Perturbation for the oracle suite.
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// Comma-separated step sizes for the oracle suite.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub k: u32,
    /// Perturbation JSON file; defaults to Y_{2,(0,2,...,2)}.
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// Comma-separated step sizes.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Band limit L of the trial space (default k + band + 2).
    #[arg(long = "band-limit")]
    pub band_limit: Option<u32>,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = 1)]
    pub xi: u32,
}

pub const DEFAULT_EPS: [f64; 3] = [4e-3, 2e-3, 1e-3];

/// Provenance block written into every output.
#[derive(Serialize, Debug, Default)]
pub struct ConfigEcho {
    pub command: &'static str,
    pub version: &'static str,
    pub dim: Option<usize>,
    pub k: Option<u32>,
    pub kmax: Option<u32>,
    pub rho_path: Option<String>,
    pub rho: Option<serde_json::Value>,
    pub route: Option<RouteArg>,
    pub quad_degree: Option<usize>,
    pub tol: Option<f64>,
    pub suite: Option<Suite>,
    pub eps: Option<Vec<f64>>,
    pub band_limit: Option<u32>,
    pub xi: Option<u32>,
    pub node_cap: String,
}

impl ConfigEcho {
    pub fn new(command: &'static str) -> Self {
        ConfigEcho { command, version: env!("CARGO_PKG_VERSION"), node_cap: node_cap_from_env().to_string(), ..Default::default() }
    }

    pub fn with_rho(mut self, path: Option<&PathBuf>, rho: &PerturbationFunction) -> Self {
        self.rho_path = path.map(|p| p.display().to_string());
        self.rho = serde_json::from_str(&rho.to_json()).ok();
        self
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

impl Common {
    /// Applies the node cap before any grid is built.
    pub fn apply(&self) -> CliResult<()> {
        if let Some(cap) = self.node_cap {
            if cap == 0 {
                return Err(CliError::Parse("--node-cap must be positive".into()));
            }
            std::env::set_var(NODE_CAP_ENV, cap.to_string());
        }
        Ok(())
    }

    pub fn resolve_dim(&self, rho: Option<&PerturbationFunction>, default: usize) -> CliResult<usize> {
        let d = match (self.dim, rho) {
            (Some(d), Some(r)) if d != r.dim() => {
                return Err(CliError::Parse(format!("--dim {d} does not match the rho file dimension {}", r.dim())))
            }
            (Some(d), _) => d,
            (None, Some(r)) => r.dim(),
            (None, None) => default,
        };
        if d < 3 {
            return Err(CliError::Parse(format!("dimension must be >= 3, got {d}")));
        }
        Ok(d)
    }

    pub fn write(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(p) => fs::write(p, text).map_err(|e| CliError::Parse(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

pub fn load_rho(path: &PathBuf) -> CliResult<PerturbationFunction> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    PerturbationFunction::from_json(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// `Y_{2,(0,2,...,2)}` on `S^d`.
pub fn default_oracle_rho(d: usize) -> CliResult<PerturbationFunction> {
    let mut m = vec![2; d - 1];
    m[0] = 0;
    Ok(PerturbationFunction::single(HarmonicIndex::new(2, m)?, 1.0)?)
}

pub fn check_k(k: u32) -> CliResult<u32> {
    if k < 1 {
        return Err(CliError::Parse("k must be >= 1".into()));
    }
    Ok(k)
}

pub fn check_eps(eps: &[f64]) -> CliResult<Vec<f64>> {
    if eps.is_empty() {
        return Ok(DEFAULT_EPS.to_vec());
    }
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(CliError::Parse("--eps values must be positive and finite".into()));
    }
    Ok(eps.to_vec())
}

pub fn check_tol(tol: Option<f64>, default: f64) -> CliResult<f64> {
    match tol {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(CliError::Parse("--tol must be positive and finite".into())),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}
