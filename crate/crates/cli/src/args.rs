use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "transop",
    version,
    about = "Simulate stochastic dynamics and estimate transfer operators from trajectories"
)]
pub struct Cli {
    /// File of `key=value` lines supplying any long flag; flags given on
    /// the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Where to write the run manifest (default: `<main output>.manifest.json`).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Integrate a built-in system and write the trajectory as CSV.
    Simulate {
        #[command(subcommand)]
        system: System,
    },
    /// Estimate eigenvalues and eigenfunctions at one lag.
    Analyze(AnalyzeArgs),
    /// Implied timescales over a list of lags.
    Scan(ScanArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    /// Ornstein-Uhlenbeck process, sampled exactly.
    Ou(OuArgs),
    /// Double gyre on [0,2]x[0,1] with reflecting walls (Euler-Maruyama).
    DoubleGyre(GyreArgs),
    /// Overdamped Langevin dynamics in a potential (Euler-Maruyama).
    Smoluchowski(SmoluchowskiArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OuArgs {
    /// Friction coefficient.
    #[arg(long)]
    pub alpha: f64,
    /// Diffusion coefficient D.
    #[arg(long)]
    pub diff: f64,
    /// Sampling interval.
    #[arg(long)]
    pub tau: f64,
    /// Number of states, including the start.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GyreArgs {
    /// Velocity amplitude.
    #[arg(long = "A", default_value_t = 0.25)]
    pub a: f64,
    /// Noise amplitude per component.
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Integrator step.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long)]
    pub steps: usize,
    /// Start point `x,y`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x0: Vec<f64>,
    /// Write every k-th state.
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Potential {
    /// V(x) = sum k_i x_i^2 / 2
    Quadratic,
    /// V(x) = b (x_1^2 - 1)^2 + sum_{i>1} x_i^2 / 2
    DoubleWell,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// sqrt(2 D)
    Standard,
    /// sqrt(2 d D), d the state dimension
    Paper,
}

#[derive(Debug, Args, Serialize)]
pub struct SmoluchowskiArgs {
    #[arg(long, value_enum, default_value_t = Potential::Quadratic)]
    pub potential: Potential,
    /// State dimension.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Quadratic stiffness, one value or one per dimension.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub stiffness: Vec<f64>,
    /// Double-well barrier height.
    #[arg(long, default_value_t = 1.0)]
    pub barrier: f64,
    /// Diffusion coefficient D.
    #[arg(long)]
    pub diff: f64,
    #[arg(long, value_enum, default_value_t = Convention::Standard)]
    pub noise_convention: Convention,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long)]
    pub steps: usize,
    /// Start point, comma-separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Tica,
    Dmd,
    Vac,
    EdmdKoopman,
    EdmdPf,
    Msm,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmdVariantArg {
    Standard,
    Exact,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// Trajectory CSV, one state per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Time between consecutive rows.
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    /// Dictionary: identity, identity-centered, monomials:<deg>,
    /// indicator:<lo>:<hi>:<n>[,...], rbf-grid:<lo>:<hi>:<n>[,...][:<bandwidth>]
    #[arg(long, default_value = "identity", allow_hyphen_values = true)]
    pub dict: String,
    /// Use covariances averaged with the time-reversed data.
    #[arg(long)]
    pub symmetrize: bool,
    /// Relative singular value cutoff.
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
    /// Discretize by k-means with this many clusters (msm only).
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Seed for k-means.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long, default_value_t = 1)]
    pub lag_steps: usize,
    #[arg(long, value_enum, default_value_t = DmdVariantArg::Exact)]
    pub dmd_variant: DmdVariantArg,
    /// Also compute Koopman modes for the full-state observable.
    #[arg(long)]
    pub modes: bool,
    /// Sample eigenfunctions on `lo:hi:n[,lo:hi:n...]`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Number of eigenfunctions written to the grid CSV.
    #[arg(long, default_value_t = 4)]
    pub n_eigs: usize,
    /// Spectrum JSON.
    #[arg(short = 'o', long)]
    pub out_json: PathBuf,
    /// Eigenfunction grid CSV (default: `<out-json>.grid.csv`).
    #[arg(long)]
    pub out_grid: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMethodArg {
    Tica,
    Vac,
    EdmdKoopman,
    Msm,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub method: ScanMethodArg,
    /// Lags in steps, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lags: Vec<usize>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest_file: PathBuf,
    /// Fail unless every output is byte-identical to the recorded run.
    #[arg(long)]
    pub verify: bool,
}
