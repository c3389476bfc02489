use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qmaxent::oracle::DEFAULT_BUDGET;
use qmaxent::thermo::DEFAULT_FD_STEP;

#[derive(Debug, Parser)]
#[command(
    name = "qmaxent",
    version,
    about = "Maximum Tsallis-entropy inference of two-qubit states from Bell-CHSH data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form state, partition function and multipliers for one data point.
    Infer(InferArgs),
    /// Entanglement region over the feasible (b_q, sigma2_q) square.
    Scan(ScanArgs),
    /// Generalized mutual entropy of the inferred state.
    Mutual(MutualArgs),
    /// Finite-difference check of the Legendre structure.
    Thermo(ThermoArgs),
    /// Compare the closed form with a numerical maximizer.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Data {
    /// Nonextensivity index q > 0.
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    /// q-expectation of the CHSH operator.
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    /// q-expectation of the squared CHSH operator.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma2: f64,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Emit JSON instead of `key: value` lines.
    #[arg(long)]
    pub json: bool,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub data: Data,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Write the CSV to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MutualArgs {
    #[command(flatten)]
    pub data: Data,
    /// Divergence order q'; defaults to q.
    #[arg(long, allow_negative_numbers = true)]
    pub qprime: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ThermoArgs {
    #[command(flatten)]
    pub data: Data,
    /// Central-difference step.
    #[arg(long, default_value_t = DEFAULT_FD_STEP, allow_negative_numbers = true)]
    pub fd_step: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleChoice {
    Split,
    General,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub data: Data,
    #[arg(long, value_enum, default_value_t = OracleChoice::Split)]
    pub oracle: OracleChoice,
    /// Seed of the random start (general oracle).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Objective evaluations allowed (general oracle).
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[command(flatten)]
    pub output: Output,
}
