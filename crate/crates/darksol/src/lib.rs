//! Command-line front end for the dark soliton solver: configuration,
//! file formats, reports and the subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod io;
pub mod report;
pub mod svg;

pub use commands::Context;
pub use config::{LoadedConfig, RunConfig};
pub use error::{CliError, CliResult};

/// Subcommands understood by [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolvePeriodic,
    SolveSoliton,
    Verify,
    Evolve,
    Sweep,
}

/// Runs one subcommand and returns the exit code. Errors are printed to stderr.
pub fn run(command: Command, ctx: &Context) -> u8 {
    let result = match command {
        Command::SolvePeriodic => commands::solve_periodic_cmd(ctx),
        Command::SolveSoliton => commands::solve_soliton_cmd(ctx),
        Command::Verify => commands::verify_cmd(ctx),
        Command::Evolve => commands::evolve_cmd(ctx),
        Command::Sweep => commands::sweep_cmd(ctx),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
