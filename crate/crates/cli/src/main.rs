//! `qsteer`: steering radii, region sweeps, hidden-state models, noise
//! thresholds and simulated tomography from the command line.

mod commands;
mod document;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsteer::quantum::MeasurementSetting;
use qsteer::steering::Direction;

use crate::document::{ResultDocument, Status};

#[derive(Debug, Parser)]
#[command(name = "qsteer", version, about = "EPR steering radius toolkit for two-qubit states")]
pub struct Cli {
    /// Worker threads for parallel searches and sweeps.
    #[arg(long, global = true, env = "QSTEER_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steering radius of a family state or of a state file.
    Radius(RadiusArgs),
    /// Classify a (θ, η) grid and write theta,eta,class,R_ab,R_ba as CSV.
    Sweep(SweepArgs),
    /// Explicit hidden-state model for A's conditional states.
    Lhsm(LhsmArgs),
    /// White-noise and conditional-state fidelity thresholds.
    Fidelity(FidelityArgs),
    /// Simulated photon-counting experiment with tomography.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// θ in radians; "5pi/48" style fractions of π are accepted.
    #[arg(long, value_parser = parse::angle, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Ab,
    Ba,
    Both,
}

impl DirectionArg {
    pub fn directions(self) -> Vec<Direction> {
        match self {
            DirectionArg::Ab => vec![Direction::AToB],
            DirectionArg::Ba => vec![Direction::BToA],
            DirectionArg::Both => vec![Direction::AToB, Direction::BToA],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OneDirection {
    Ab,
    Ba,
}

impl From<OneDirection> for Direction {
    fn from(d: OneDirection) -> Self {
        match d {
            OneDirection::Ab => Direction::AToB,
            OneDirection::Ba => Direction::BToA,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RadiusArgs {
    #[arg(long, value_parser = parse::angle, allow_hyphen_values = true, requires = "eta", conflicts_with = "state")]
    pub theta: Option<f64>,
    #[arg(long, requires = "theta")]
    pub eta: Option<f64>,
    /// 16 lines "re im", row-major in the basis |00⟩, |01⟩, |10⟩, |11⟩.
    #[arg(long, required_unless_present = "theta")]
    pub state: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    pub direction: DirectionArg,
    /// Fixed pair of settings: "xz", "x,y" or "nx,ny,nz;mx,my,mz".
    #[arg(long, value_parser = parse::settings, conflicts_with = "exhaustive", allow_hyphen_values = true)]
    pub settings: Option<[MeasurementSetting; 2]>,
    /// Search over all pairs of settings.
    #[arg(long)]
    pub exhaustive: bool,
    /// Also report the closed-form radius and its difference.
    #[arg(long)]
    pub analytic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// θ grid "start:stop:count"; π fractions allowed.
    #[arg(long, value_parser = parse::angle_grid, default_value = "0:pi/2:31")]
    pub theta: parse::Grid,
    /// η grid "start:stop:count".
    #[arg(long, value_parser = parse::plain_grid, default_value = "0.5:1:26")]
    pub eta: parse::Grid,
    /// CSV destination; without it the CSV goes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LhsmArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_parser = parse::settings, default_value = "xz", allow_hyphen_values = true)]
    pub settings: [MeasurementSetting; 2],
    /// Three-state model at the settings where one pair of states is
    /// antipodal and pure.
    #[arg(long, conflicts_with = "settings")]
    pub singular: bool,
    /// ba: B measures, A is steered (the side with a model in the one-way
    /// region). ab reports the optimal ensemble for B's states.
    #[arg(long, value_enum, default_value = "ba")]
    pub direction: OneDirection,
}

#[derive(Debug, Clone, Args)]
pub struct FidelityArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Objective evaluations shared by the two floor searches.
    #[arg(long, default_value_t = 64_000)]
    pub budget: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Expected total pair count, or "inf" for the exact assemblage.
    #[arg(long = "N", value_parser = parse::pairs, default_value = "2e5")]
    pub pairs: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "ab")]
    pub direction: OneDirection,
    #[arg(long, value_parser = parse::settings, default_value = "xz", allow_hyphen_values = true)]
    pub settings: [MeasurementSetting; 2],
    /// The source emits λρ + (1 − λ)I/4 instead of ρ.
    #[arg(long, default_value_t = 1.0)]
    pub source_lambda: f64,
    /// Write the simulated counts as CSV.
    #[arg(long)]
    pub counts_out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] qsteer::Error),
}

/// What a command produced: a document, raw CSV text, or both.
pub struct Outcome {
    pub document: Option<ResultDocument>,
    pub csv: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let argv: Vec<String> = std::env::args().collect();
    match commands::run(&cli.command, argv) {
        Ok(out) => {
            if let Some(csv) = out.csv {
                print!("{csv}");
            }
            match out.document {
                Some(doc) => {
                    println!("{}", doc.to_json());
                    if doc.status == Status::Partial {
                        eprintln!("warning: search did not converge; partial results emitted");
                        return ExitCode::from(3);
                    }
                    ExitCode::SUCCESS
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
