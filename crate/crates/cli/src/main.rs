use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod inputs;

use args::{Cli, Command};
use inputs::Failure;

fn run(cli: &Cli) -> Result<commands::Output, Failure> {
    match &cli.command {
        Command::Bounds(a) => commands::bounds(a),
        Command::Maxbell(a) => commands::maxbell(a),
        Command::Fine(a) => commands::fine(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Mprime(a) => commands::mprime(a),
        Command::Catalog(a) => commands::catalog(a),
        Command::Strategy(a) => commands::strategy(a),
        Command::Merit(a) => commands::merit(a),
        Command::SolvePrior(a) => commands::solve_prior_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|out| {
        commands::write_output(cli.output.as_deref(), &out.body)?;
        if !cli.quiet {
            for line in &out.summary {
                eprintln!("{line}");
            }
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Infeasible { message, report } => {
                    let body = serde_json::to_string_pretty(report).unwrap_or_default() + "\n";
                    if let Err(e) = commands::write_output(cli.output.as_deref(), &body) {
                        eprintln!("error: could not write certificate: {e:?}");
                    }
                    eprintln!("infeasible: {message}");
                }
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Compute(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
