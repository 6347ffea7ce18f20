mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error: {first}");
            eprintln!("{}", e.render().to_string().lines().skip(1).collect::<Vec<_>>().join("\n"));
            return ExitCode::from(1);
        }
    };
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, err) = match &failure {
                Failure::Usage(e) => (1, e),
                Failure::Rejected(e) => (2, e),
                Failure::Internal(e) => (3, e),
            };
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
