//! `psum`: batch front-end reading JSON problem specifications and writing
//! CSV/JSON artifacts.

mod commands;
mod failure;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::failure::Failure;
use crate::spec::ProblemSpec;

#[derive(Debug, Parser)]
#[command(name = "psum", version, about = "Counts, zeta functions and exponential sums over p-adic submanifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Problem specification (JSON, schema 1).
    #[arg(long, global = true, conflicts_with = "instance")]
    pub spec: Option<PathBuf>,
    /// Use a bundled instance instead of a spec file.
    #[arg(long, global = true)]
    pub instance: Option<String>,
    /// Directory for the output artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Largest level M; overrides the spec.
    #[arg(long, global = true)]
    pub max_level: Option<u32>,
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Node budget; overrides the spec.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Recorded in every manifest.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Deliberately break one ingredient to exercise the verifiers.
    #[arg(long, global = true, value_enum)]
    pub mutate: Option<Mutation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Table of N_m.
    Count,
    /// N_m, the reconstructed Poincare series and the identity with Z.
    Poincare,
    /// Local zeta coefficients, reconstruction and pole data.
    Zeta,
    /// Direct exponential sums.
    Expsum,
    /// Exponential sums against the stationary phase formula.
    SpsVerify,
    /// Smoothing certificates and chart decomposition.
    Smooth,
    /// Convergence of the delta_r regularization.
    DeltaCheck,
    /// Decay of the largest sums against the predicted rate.
    Decay,
    /// Points where the Jacobian drops rank.
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mutation {
    /// Scale the Gauss sums by 1.5.
    GaussScale,
    /// Use the wrong normalization of delta_r.
    DeltaNorm,
    /// Perturb a zeta coefficient.
    ZetaCoefficient,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let spec = match (&cli.spec, &cli.instance) {
        (Some(path), _) => ProblemSpec::load(path)?,
        (None, Some(name)) => ProblemSpec::bundled(name)?,
        (None, None) => return Err(Failure::Schema("either --spec or --instance is required".into())),
    };
    commands::execute(cli, spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("psum: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
