//! `geowrap` command-line tool. Exit codes: 0 success, 1 usage error,
//! 2 data error, 3 verification failure.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Verification,
}

impl From<geowrap::Error> for CliError {
    fn from(e: geowrap::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample { spec, n, seed, out } => commands::sample(&spec.spec, n, seed, &out),
        Command::Logpdf { spec, points, out } => commands::logpdf(&spec.spec, &points, &out),
        Command::FitSigma { fit } => commands::fit_sigma(&fit),
        Command::FitBayes { fit, prior_nu, prior_scale } => commands::fit_bayes(&fit, prior_nu, prior_scale),
        Command::FitMixture { samples, variant, components, max_iter, seed, out } => {
            commands::fit_mixture(&samples, &variant, components, max_iter, seed, &out)
        }
        Command::NetworkFit(a) => commands::network_fit(&a),
        Command::Verify { out } => commands::verify(&out),
        Command::Limits { n, seed, out } => commands::limits(n, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    eprintln!("{}\n{}", e.render(), Cli::command().render_help());
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_help());
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
    }
}
