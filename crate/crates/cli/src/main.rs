mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit codes shared by every command.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Scan(a) => commands::scan(&cli.global, a),
        Command::Lookup(a) => commands::lookup(&cli.global, a),
        Command::XorAssoc(a) => commands::xor_assoc(&cli.global, a),
        Command::B32(a) => commands::b32(&cli.global, a),
        Command::Simulate(a) => commands::simulate(&cli.global, a),
        Command::Genconfig(a) => commands::genconfig(&cli.global, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
