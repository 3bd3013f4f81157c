mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Verification pipeline for pair-valued sequence algebras.
#[derive(Debug, Parser)]
#[command(name = "feynman", version)]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Tolerance for derived equalities.
    #[arg(long = "tol", global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long = "seed", global = true, default_value_t = 0)]
    pub rng_seed: u64,
    /// Random samples per check.
    #[arg(long = "samples", global = true, default_value_t = 10_000)]
    pub sample_count: usize,
    #[arg(long = "format", global = true, value_enum, default_value_t = Format::Text)]
    pub output_format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify an eight-coefficient product and reduce it to standard form.
    Classify(GammaArgs),
    /// Reduce a product to its standard form and print the map.
    Reduce(GammaArgs),
    /// Show the probability-function family of a standard form.
    SolveH(SolveHArgs),
    /// Solve for the reciprocity operators of standard forms.
    SolveReciprocity(FormArgs),
    /// Run the repeated-measurement elimination for one operator.
    Eliminate(EliminateArgs),
    /// Run the full derivation and print the verdict table.
    Derive,
    /// Compute amplitudes and probabilities of sequences in a set-up.
    Simulate(SimulateArgs),
    /// Check the sequence-algebra laws on generated instances.
    CheckSymmetries(SymmetryArgs),
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    /// Eight coefficients γ1 … γ8.
    #[arg(allow_negative_numbers = true, num_args = 0..)]
    pub gamma: Vec<String>,
    /// JSON file holding an array of eight numbers.
    #[arg(long, conflicts_with = "gamma")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveHArgs {
    #[arg(long)]
    pub form: String,
    /// Check multiplicativity of this member on random samples.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FormArgs {
    /// Form to solve; all five when omitted.
    #[arg(long)]
    pub form: Option<String>,
}

#[derive(Debug, Args)]
pub struct EliminateArgs {
    #[arg(long)]
    pub form: String,
    /// identity, conjugation, swap or projection.
    #[arg(long, conflicts_with = "matrix")]
    pub op: Option<String>,
    /// Operator entries R1 R2 R3 R4.
    #[arg(long, num_args = 4, allow_negative_numbers = true)]
    pub matrix: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub setup: PathBuf,
    pub sequences: PathBuf,
}

#[derive(Debug, Args)]
pub struct SymmetryArgs {
    /// Instances per law.
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    #[arg(long, default_value_t = 4)]
    pub labels: u32,
}

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const NEGATIVE: u8 = 2;
    pub const REGRESSION: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const IO: u8 = 74;
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    if !(cli.run.tolerance > 0.0 && cli.run.tolerance.is_finite()) {
        eprintln!("error: --tol must be positive and finite");
        return ExitCode::from(exit::USAGE);
    }
    if cli.run.sample_count == 0 {
        eprintln!("error: --samples must be at least 1");
        return ExitCode::from(exit::USAGE);
    }
    match commands::run(&cli) {
        Ok(out) => match report::emit(&cli.run, out.command, &out.result, &out.text) {
            Ok(()) => ExitCode::from(out.status),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit::IO)
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.status)
        }
    }
}
