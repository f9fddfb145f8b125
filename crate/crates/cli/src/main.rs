mod args;
mod commands;
mod failure;
mod manifest;
mod problem;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use failure::{exit_code, EXIT_OK, EXIT_USAGE};

/// Caps the sweep thread pool when `ADAM_DYNAMICS_THREADS` is set.
fn configure_threads() {
    let Ok(value) = std::env::var("ADAM_DYNAMICS_THREADS") else { return };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: could not size thread pool: {e}");
            }
        }
        _ => eprintln!("warning: ignoring ADAM_DYNAMICS_THREADS={value:?}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::Cycle(a) => commands::cycle_cmd(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
        Command::Verify(a) => commands::verify_cmd(a),
        Command::Replay(a) => commands::replay_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
