mod args;
mod commands;
mod config;
mod manifest;
mod parse;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Parses `argv` (config merged) and runs it. Usage errors exit with
/// status 2 from inside clap.
pub(crate) fn run(argv: Vec<String>) -> anyhow::Result<()> {
    let argv = config::merge(argv)?;
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());
    commands::execute(cli, &argv)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
