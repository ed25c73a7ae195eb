//! `slitsic`: design, simulate and analyse single-plane tetrahedron
//! tomography of Gaussian double-slit qubits.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 no solutions found,
//! 4 I/O failure.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{bloch_curve, design, geometry, pattern, reconstruct, search, simulate};

#[derive(Debug, Parser)]
#[command(name = "slitsic", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Search(search::SearchArgs),
    Design(design::DesignArgs),
    Pattern(pattern::PatternArgs),
    BlochCurve(bloch_curve::BlochCurveArgs),
    Simulate(simulate::SimulateArgs),
    Reconstruct(reconstruct::ReconstructArgs),
    Geometry(geometry::GeometryArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Search(a) => search::run(a),
        Command::Design(a) => design::run(a),
        Command::Pattern(a) => pattern::run(a),
        Command::BlochCurve(a) => bloch_curve::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Reconstruct(a) => reconstruct::run(a),
        Command::Geometry(a) => geometry::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slitsic: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
