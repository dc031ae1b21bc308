//! Command-line driver for the abcd Boussinesq laboratory.

// negated comparisons like `!(x > 0.0)` are NaN-rejecting guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Invocation;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "abcdlab",
    version,
    about = "Numerical laboratory for the abcd Boussinesq system",
    long_about = "Parameter-space atlas, pseudo-spectral simulation and virial diagnostics \
                  for the abcd Boussinesq system in its Hamiltonian generic regime."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (sectioned key = value; unknown keys are errors)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for this run (created, must not exist).
    /// Defaults to $ABCDLAB_OUT_ROOT/<subcommand> or out/<subcommand>.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for the randomized property suites
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for parameter sweeps
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Region grids, gamma boundary curve and band tables as CSV + plots
    Atlas,
    /// One simulation run into a self-describing run directory
    Simulate,
    /// Run the full property suite and report per-property results
    Verify,
    /// Dispersion relation and group-velocity tables with the cubic report
    Dispersion,
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // ignore the error if a pool already exists (e.g. under tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let (name, needs_out) = match cli.command {
        Command::Atlas => ("atlas", true),
        Command::Simulate => ("simulate", true),
        Command::Verify => ("verify", cli.out.is_some()),
        Command::Dispersion => ("dispersion", true),
    };
    let inv = match Invocation::load(name, cli.config, cli.out, cli.seed) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("abcdlab: {e}");
            std::process::exit(e.exit_code());
        }
    };
    let result = match cli.command {
        Command::Atlas => commands::atlas::run(&inv),
        Command::Simulate => commands::simulate::run(&inv),
        Command::Verify => commands::verify_cmd::run(&inv, needs_out),
        Command::Dispersion => commands::dispersion::run(&inv),
    };
    if let Err(e) = result {
        eprintln!("abcdlab: {e}");
        std::process::exit(e.exit_code());
    }
}
