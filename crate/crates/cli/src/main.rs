//! `cctp` binary entry point. All real work lives in [`commands`]; this
//! file only maps the two failure classes onto process exit codes.

mod commands;
mod manifest;
mod svg;

use clap::Parser;
use commands::{Cli, CliFailure};

fn main() {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => {}
        Err(CliFailure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            std::process::exit(1);
        }
        Err(CliFailure::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
