use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "mbmlab",
    version,
    about = "Simulate multifractional Brownian motion and probe its pointwise regularity"
)]
#[command(arg_required_else_help = true, propagate_version = true)]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,

    /// Directory receiving outputs and run.json.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Build a kernel table, or summarize an existing one.
    KernelTable(KernelTableArgs),
    /// Check the regularity conditions on a Hurst function at given points.
    ValidateHurst(ValidateHurstArgs),
    /// Synthesize a sample path on a grid.
    Simulate(SimulateArgs),
    /// Beam search for slow or rapid point candidates.
    FindPoints(FindPointsArgs),
    /// Oscillation ratios and classification of points of a path.
    Analyze(AnalyzeArgs),
    /// Local asymptotic self-similarity scan at one point.
    Lass(LassArgs),
    /// Whether Z − B_H is smoother than B_H for the band [a, b].
    CheckZCondition(CheckZArgs),
    /// Re-run a recorded command and compare output digests.
    #[serde(skip)]
    Reproduce(ReproduceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::KernelTable(_) => "kernel-table",
            Self::ValidateHurst(_) => "validate-hurst",
            Self::Simulate(_) => "simulate",
            Self::FindPoints(_) => "find-points",
            Self::Analyze(_) => "analyze",
            Self::Lass(_) => "lass",
            Self::CheckZCondition(_) => "check-z-condition",
            Self::Reproduce(_) => "reproduce",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).args(["hurst_range", "thetas", "input"])))]
pub struct KernelTableArgs {
    /// Tabulate exponents covering a Hurst band.
    #[arg(long, value_name = "LO,HI")]
    pub hurst_range: Option<Pair>,
    /// Explicit exponent list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thetas: Option<Vec<f64>>,
    /// Also tabulate the dual exponents −θ−1 of the band.
    #[arg(long, requires = "hurst_range")]
    pub dual: bool,
    #[arg(long, default_value_t = 1.0 / 256.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 64.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Read and summarize this table instead of building one.
    #[arg(long, conflicts_with_all = ["hurst_range", "thetas"])]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateHurstArgs {
    /// Hurst function JSON.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Vec<f64>,
    /// Largest probe distance; probes halve from there.
    #[arg(long, default_value_t = mbmlab::hurst::DEFAULT_PROBE_RADIUS)]
    pub probe_radius: f64,
    #[arg(long, default_value_t = mbmlab::hurst::DEFAULT_PROBES)]
    pub probes: usize,
    #[arg(long, default_value_t = mbmlab::hurst::DEFAULT_SLACK)]
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Bh,
    Fh,
    Z,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub hurst: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "T0,DT,N", allow_hyphen_values = true)]
    pub grid: GridArg,
    #[arg(long, value_name = "JMIN,JMAX,W", allow_hyphen_values = true, default_value = "-8,14,64")]
    pub policy: PolicyArg,
    /// Sparse coefficient field `{"j,k": value}` replacing the Gaussian one.
    #[arg(long)]
    pub stub_field: Option<PathBuf>,
    /// Kernel table to use instead of building or loading a cached one.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Tabulated time-domain wavelet for the `fh` model (default: Meyer).
    #[arg(long)]
    pub wavelet: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Slow,
    Rapid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveArg {
    Peak,
    Sustained,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FindPointsArgs {
    #[arg(long, value_enum)]
    pub mode: SearchMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shell parameter for slow searches.
    #[arg(long, default_value_t = 4.0)]
    pub m: f64,
    #[arg(long, default_value_t = 14)]
    pub jmax: u32,
    #[arg(long, default_value_t = 32)]
    pub beam: usize,
    #[arg(long, value_name = "A,B", default_value = "0,1")]
    pub interval: Pair,
    /// First scored level of rapid searches (default: ⌈jmax/2⌉).
    #[arg(long)]
    pub j_from: Option<u32>,
    #[arg(long, value_enum, default_value = "peak")]
    pub objective: ObjectiveArg,
    #[arg(long)]
    pub stub_field: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("exponent").required(true).args(["hurst", "h"])))]
pub struct AnalyzeArgs {
    /// Path CSV with `t,value` rows.
    #[arg(long)]
    pub path: PathBuf,
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Vec<f64>,
    /// Hurst function giving H(t) at each point.
    #[arg(long)]
    pub hurst: Option<PathBuf>,
    /// Constant exponent used at every point.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 4)]
    pub nmin: u32,
    #[arg(long, default_value_t = 14)]
    pub nmax: u32,
    #[arg(long, default_value_t = 8)]
    pub growth_window: usize,
    #[arg(long, default_value_t = 3.0)]
    pub band_factor: f64,
    #[arg(long, default_value_t = 0.3)]
    pub slope_threshold: f64,
    /// Also write an SVG of the ratio curves.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LassArgs {
    #[arg(long, value_enum, default_value = "bh")]
    pub model: ModelArg,
    #[arg(long)]
    pub hurst: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    /// Strictly decreasing zoom factors.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.125,0.0625,0.03125,0.015625")]
    pub rhos: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-1,-0.5,-0.25,-0.125,0.125,0.25,0.5,1"
    )]
    pub s: Vec<f64>,
    #[arg(long, default_value_t = 256)]
    pub paths: usize,
    /// Path i uses the Gaussian field with seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "JMIN,JMAX,W", allow_hyphen_values = true, default_value = "-8,14,64")]
    pub policy: PolicyArg,
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CheckZArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// run.json written by an earlier command.
    pub config: PathBuf,
}

/// `x,y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match parse_list::<f64>(s, 2)?.as_slice() {
            [a, b] => Ok(Self(*a, *b)),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridArg {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl FromStr for GridArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("expected T0,DT,N, got {s:?}"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let n = parts[2].trim().parse::<usize>().map_err(|e| format!("{:?}: {e}", parts[2]))?;
        Ok(Self { t0: num(parts[0])?, dt: num(parts[1])?, n })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyArg {
    pub j_min: i32,
    pub j_max: i32,
    pub window: i64,
}

impl FromStr for PolicyArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = parse_list::<i64>(s, 3)?;
        let level = |x: i64| i32::try_from(x).map_err(|_| format!("level {x} out of range"));
        Ok(Self { j_min: level(v[0])?, j_max: level(v[1])?, window: v[2] })
    }
}

fn parse_list<T: FromStr>(s: &str, len: usize) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<Vec<T>, String>>()?;
    if v.len() != len {
        return Err(format!("expected {len} comma-separated values, got {}", v.len()));
    }
    Ok(v)
}
