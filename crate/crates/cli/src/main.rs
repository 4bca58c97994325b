use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod output;

use args::{Cli, Command, OracleCommand};
use output::Failure;

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Amplitude(a) => commands::amplitude(&a),
        Command::Certify(a) => commands::certify(&a),
        Command::Probability(a) => commands::probability(&a),
        Command::Oscillator(a) => commands::oscillator(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Oracle(OracleCommand::Quadrature(a)) => commands::oracle_quadrature(&a),
        Command::Oracle(OracleCommand::Phi(a)) => commands::oracle_phi(&a),
        Command::Oracle(OracleCommand::SccSweep(a)) => commands::oracle_scc_sweep(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
