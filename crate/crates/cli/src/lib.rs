//! Command-line driver: corpus generation, model training, evaluation and
//! self-checks. [`run`] parses arguments and returns the process exit code.

pub mod args;
pub mod commands;
pub mod config;
pub mod failure;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use failure::{CmdResult, Failure};

pub fn execute(command: &Command) -> CmdResult {
    match command {
        Command::Generate(a) => commands::generate(a),
        Command::TrainWlda(a) => commands::train_wlda(a),
        Command::TrainGibbs(a) => commands::train_gibbs(a),
        Command::MatchPrior(a) => commands::match_prior(a),
        Command::Eval(a) => commands::eval(a),
        Command::Classify(a) => commands::classify(a).map(|_| ()),
        Command::Gradcheck(a) => commands::gradcheck(a).map(|_| ()),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code: 0 success, 1 usage, 2 data error, 3 failed check.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let expanded = match config::expand_config_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(expanded) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => Failure::usage("").exit_code(),
            };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
