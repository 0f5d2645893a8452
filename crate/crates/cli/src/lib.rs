//! Command-line front end for the `ssbmeasure` simulator.
//!
//! Exit codes: 0 success, 1 verification failure, 2 I/O, 3 config, 4 data.

pub mod commands;
pub mod config;
pub mod counts_csv;
pub mod error;
pub mod output;
pub mod verify;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Cli, Command};
use error::ExitCode;

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::Success as i32,
                _ => ExitCode::Config as i32,
            };
        }
    };
    let outcome = match &cli.command {
        Command::Verify(a) => commands::verify(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Tomography(a) => commands::tomography(a),
    };
    match outcome {
        Ok(code) => code as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as i32
        }
    }
}
