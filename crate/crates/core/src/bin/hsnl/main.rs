//! `hsnl <subcommand> [--key=value | --key value | --config file]...`
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 numerical
//! nonconvergence.

mod commands;
mod config;
mod errors;

use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.is_empty() || argv[0] == "--help" || argv[0] == "help" {
        eprintln!("usage: hsnl <{}> [--key=value]... [--config file] [--out path]", commands::COMMANDS.join("|"));
        return ExitCode::from(if argv.is_empty() { 1 } else { 0 });
    }
    let result = config::parse_args(&argv).and_then(commands::run);
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hsnl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
