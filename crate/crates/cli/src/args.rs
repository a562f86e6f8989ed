use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "qft", version, about = "Complex q-Fourier transform toolkit")]
pub struct Cli {
    /// JSON file supplying flag values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Tabulate F(k, q) on a k grid for one or more q.
    Transform(TransformArgs),
    /// Reconstruct f through the q -> 1 slice and report the residual.
    Invert(InvertArgs),
    /// Compare Hilhorst functions at q and at q +- 0.2.
    Collide(CollideArgs),
    /// Run a self-check suite.
    Verify(VerifyArgs),
    /// Measure the delta weight of the transform of f = 1.
    Delta(DeltaArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FunctionArgs {
    /// heaviside+, heaviside-, constant, powerlaw, hilhorst, gaussian, qgaussian or sampled
    #[arg(long = "f", value_name = "NAME")]
    pub f: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Value of the constant function.
    #[arg(long)]
    pub value: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Index of the q-Gaussian.
    #[arg(long)]
    pub qg: Option<f64>,
    #[arg(long = "qg-beta")]
    pub qg_beta: Option<f64>,
    /// Index fixing lambda for the hilhorst function (defaults to the first q).
    #[arg(long)]
    pub q0: Option<f64>,
    /// Two-column x,y file for the sampled function.
    #[arg(long, value_name = "FILE")]
    pub samples: Option<PathBuf>,
}

/// Quadrature overrides; unset fields keep the command's defaults.
#[derive(Args, Debug, Clone, Serialize)]
pub struct QuadArgs {
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<f64>,
    #[arg(long = "abs-tol")]
    pub abs_tol: Option<f64>,
    #[arg(long = "max-subdivisions")]
    pub max_subdivisions: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct TransformArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long)]
    pub q: Option<f64>,
    /// Comma-separated q values.
    #[arg(long = "q-list", value_name = "Q1,Q2,...")]
    pub q_list: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub kmin: f64,
    #[arg(long, default_value_t = 4.0)]
    pub kmax: f64,
    #[arg(long, default_value_t = 8)]
    pub nk: usize,
    /// Imaginary part shared by every k on the grid.
    #[arg(long, default_value_t = 0.0)]
    pub kim: f64,
    /// upper, lower, real-upper or real-lower
    #[arg(long, default_value = "real-upper")]
    pub plane: String,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct InvertArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Comma-separated decreasing eps values (default depends on f).
    #[arg(long = "eps-list", value_name = "E1,E2,...")]
    pub eps_list: Option<String>,
    /// Use the last eps value without extrapolating to eps = 0.
    #[arg(long = "no-richardson")]
    pub no_richardson: bool,
    #[arg(long)]
    pub kmax: Option<f64>,
    #[arg(long)]
    pub xmin: Option<f64>,
    #[arg(long)]
    pub xmax: Option<f64>,
    #[arg(long, default_value_t = 241)]
    pub nx: usize,
    /// auto, none or lanczos
    #[arg(long, default_value = "auto")]
    pub window: String,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct CollideArgs {
    /// Intervals as "a1,b1;a2,b2;...".
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
    /// k values default to 0.5, 1, 2 unless a grid is given.
    #[arg(long)]
    pub kmin: Option<f64>,
    #[arg(long)]
    pub kmax: Option<f64>,
    #[arg(long)]
    pub nk: Option<usize>,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    /// closedforms, special, ultra, inversion or all
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true)]
pub struct DeltaArgs {
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub zeta: f64,
    #[arg(long, default_value_t = 40.0)]
    pub truncation: f64,
    #[arg(long, default_value_t = 4096)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}
