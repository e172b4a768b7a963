mod args;
mod commands;
mod config;
mod error;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Cmd};
use error::CliError;

const THREADS_VAR: &str = "HAZBANDS_THREADS";

fn parse(argv: Vec<OsString>) -> Result<Cli, CliError> {
    let command = Cli::command();
    let matches = command.clone().try_get_matches_from(&argv)?;
    let (name, sub_matches) = matches.subcommand().expect("a subcommand is required");
    let Some(path) = sub_matches.get_one::<std::path::PathBuf>("config") else {
        return Ok(Cli::from_arg_matches(&matches)?);
    };
    let sub = command.find_subcommand(name).expect("subcommand exists");
    let extra = config::extra_args(path, sub, sub_matches)?;
    let full = command.try_get_matches_from(argv.into_iter().chain(extra))?;
    Ok(Cli::from_arg_matches(&full)?)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let cli = parse(argv)?;
    configure_threads()?;
    match &cli.command {
        Cmd::Fit(a) => commands::fit(a),
        Cmd::Simulate(a) => commands::simulate(a),
        Cmd::Frequentist(a) => commands::frequentist(a),
        Cmd::Haar(a) => commands::haar(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
