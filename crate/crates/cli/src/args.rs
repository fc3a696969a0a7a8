//! Command-line grammar.
//!
//! Value flags are optional at parse time so that a config file can fill
//! them in; defaults are applied after merging.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::verify::Suite;

#[derive(Parser, Debug)]
#[command(
    name = "rdpc",
    version,
    about = "Rate-distortion-perception-classification tradeoffs for binary and Gaussian sources"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Must match the source family: bits for binary, nats for Gaussian.
    #[arg(long, global = true, value_enum)]
    pub units: Option<UnitArg>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: RDPC_WORKERS, then the number of CPUs).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// TOML file with defaults for any flag; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write a matplotlib script next to the `--out` dataset.
    #[arg(long, global = true)]
    pub emit_plot_script: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitArg {
    Bits,
    Nats,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form rate-distortion-classification function R(D, C).
    Rdc {
        #[command(subcommand)]
        family: PointFamily<DistortionBound>,
    },
    /// Closed-form rate-perception-classification function R(P, C).
    Rpc {
        #[command(subcommand)]
        family: PointFamily<PerceptionBound>,
    },
    /// Gaussian R(P, C | D) with the distortion pinned to D.
    RpcGivenD(RpcGivenDArgs),
    /// Closed-form rates over a (D or P) x C grid.
    Surface {
        #[command(subcommand)]
        family: SurfaceFamily,
    },
    /// Brute-force constrained minimization of I(X; X̂).
    Oracle {
        #[command(subcommand)]
        family: OracleFamily,
    },
    /// Linear denoising of a two-component Gaussian mixture.
    Restore(RestoreArgs),
    /// Run the verification suites and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct BinarySourceArgs {
    /// P(X = 1); default 0.3.
    #[arg(long)]
    pub a: Option<f64>,
    /// Label crossover P(S != X); default 0.1.
    #[arg(long)]
    pub p1: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GaussianSourceArgs {
    /// Default 1.
    #[arg(long)]
    pub sigma_x: Option<f64>,
    /// Default 0.7.
    #[arg(long)]
    pub sigma_s: Option<f64>,
    /// Cov(X, S); default 0.63.
    #[arg(long)]
    pub theta1: Option<f64>,
    #[arg(long)]
    pub mu_x: Option<f64>,
    #[arg(long)]
    pub mu_s: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DistortionBound {
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PerceptionBound {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum PointFamily<B: Args> {
    Binary {
        #[command(flatten)]
        src: BinarySourceArgs,
        #[command(flatten)]
        bound: B,
    },
    Gaussian {
        #[command(flatten)]
        src: GaussianSourceArgs,
        #[command(flatten)]
        bound: B,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Program {
    Rdc,
    Rpc,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Which function to tabulate; the first axis is D for rdc and P for rpc.
    #[arg(long, value_enum)]
    pub program: Option<Program>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_steps: Option<usize>,
    #[arg(long)]
    pub c_min: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub c_steps: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum SurfaceFamily {
    Binary {
        #[command(flatten)]
        src: BinarySourceArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    Gaussian {
        #[command(flatten)]
        src: GaussianSourceArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct OracleBounds {
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Skip the local refinement after the grid stage.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Subcommand, Debug)]
pub enum OracleFamily {
    Binary {
        #[command(flatten)]
        src: BinarySourceArgs,
        #[command(flatten)]
        bounds: OracleBounds,
        /// Grid spacing in (p_a, p_b); default 1e-3.
        #[arg(long)]
        resolution: Option<f64>,
    },
    Gaussian {
        #[command(flatten)]
        src: GaussianSourceArgs,
        #[command(flatten)]
        bounds: OracleBounds,
        /// Grid points along σ_x̂; default 1001.
        #[arg(long)]
        sigma_steps: Option<usize>,
        /// Grid points along the correlation; default 1001.
        #[arg(long)]
        theta_steps: Option<usize>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct RpcGivenDArgs {
    #[command(flatten)]
    pub src: GaussianSourceArgs,
    /// Pinned distortion levels; default 0.5,0.6,0.8.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<f64>,
    /// Perception bound for a point evaluation; default inf.
    #[arg(long)]
    pub p: Option<f64>,
    /// Classification bound for a point evaluation.
    #[arg(long)]
    pub c: Option<f64>,
    /// Trace the (C, minimal P) frontier at this rate instead of a point.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Frontier C range; default [h(S) floor, h(S)].
    #[arg(long)]
    pub c_min: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    /// Default 50.
    #[arg(long)]
    pub c_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    Mse,
    Kl,
    ErrorRate,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RestoreArgs {
    /// Noise standard deviation; default 1.
    #[arg(long)]
    pub sigma_n: Option<f64>,
    /// Default 0.05.
    #[arg(long)]
    pub a_min: Option<f64>,
    /// Default 1.5.
    #[arg(long)]
    pub a_max: Option<f64>,
    /// Default 200.
    #[arg(long)]
    pub a_steps: Option<usize>,
    /// Emit a frontier instead of the curve: minimize this metric...
    #[arg(long, value_enum, requires = "subject_to")]
    pub minimize: Option<MetricArg>,
    /// ...subject to this metric staying below each bound.
    #[arg(long, value_enum, requires = "minimize")]
    pub subject_to: Option<MetricArg>,
    #[arg(long)]
    pub bound_min: Option<f64>,
    #[arg(long)]
    pub bound_max: Option<f64>,
    /// Default 50.
    #[arg(long)]
    pub bound_steps: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct VerifyArgs {
    /// Suites to run (comma separated); default all.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub suite: Vec<Suite>,
}
