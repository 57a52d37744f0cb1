//! `roelab`: config-driven experiments on disordered lattice models.

mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use roelab::ktheory::Field;
use roelab::Error;

use crate::config::Config;

#[derive(Parser)]
#[command(name = "roelab", version, about = "Index pairings, decay, edge spectra and K-theory tables for lattice models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Hamiltonian and write it as an operator file.
    Build { config: PathBuf },
    /// Index pairing over the window ladder, with the Chern oracle.
    Pair { config: PathBuf },
    /// Decay profile and class of the Fermi projection.
    Decay { config: PathBuf },
    /// Cocycle check and untwisting round trip.
    Untwist { config: PathBuf },
    /// Strip spectrum and chiral edge count.
    Edge { config: PathBuf },
    /// Disorder ensemble: index histogram against disorder strength.
    Sweep { config: PathBuf },
    /// Kitaev periodic table from the symbolic K-theory.
    Ktable {
        #[arg(long, value_enum, default_value_t = FieldArg::All)]
        field: FieldArg,
        #[arg(long, default_value_t = 0)]
        dmin: i64,
        #[arg(long, default_value_t = 8)]
        dmax: i64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
    All,
}

/// 0 ok, 1 other, 2 config, 3 precondition, 4 non-convergence.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Parse { .. } => 2,
        Error::Precondition { .. } | Error::GapClosed { .. } => 3,
        Error::NonConvergence(_) => 4,
        Error::Io(_) => 1,
    }
}

fn with_config(path: &Path, f: fn(&Config) -> roelab::Result<Vec<String>>) -> roelab::Result<Vec<String>> {
    f(&Config::load(path)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build { config } => with_config(config, commands::build),
        Command::Pair { config } => with_config(config, commands::pair),
        Command::Decay { config } => with_config(config, commands::decay),
        Command::Untwist { config } => with_config(config, commands::untwist_cmd),
        Command::Edge { config } => with_config(config, commands::edge),
        Command::Sweep { config } => with_config(config, commands::sweep),
        Command::Ktable { field, dmin, dmax, out } => {
            let field = match field {
                FieldArg::Real => Some(Field::Real),
                FieldArg::Complex => Some(Field::Complex),
                FieldArg::All => None,
            };
            commands::ktable(field, *dmin, *dmax, out)
        }
    };
    match result {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("roelab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
