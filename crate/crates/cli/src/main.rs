mod args;
mod commands;
mod manifest;

use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut cli = args::Cli::parse();
    commands::absolutize(&mut cli.command);
    match commands::run(&cli.command, None) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
