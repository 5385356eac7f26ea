use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use darksol::{run, Command, Context, LoadedConfig};

#[derive(Parser)]
#[command(name = "darksol", version, about = "Dark solitons of NLS equations with periodic nonlinearity")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for `sweep`.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Periodic background state.
    SolvePeriodic,
    /// Background, heteroclinic minimizer and verification report.
    SolveSoliton,
    /// Re-check stored profiles.
    Verify {
        /// Directory with soliton.csv and phi_plus.csv (default: --out).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Time-evolve the soliton and check stationarity.
    Evolve {
        /// Use stored profiles instead of solving.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Solve over a grid of lambda and amplitude values.
    Sweep,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let config = match LoadedConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let (command, input) = match cli.command {
        Cmd::SolvePeriodic => (Command::SolvePeriodic, None),
        Cmd::SolveSoliton => (Command::SolveSoliton, None),
        Cmd::Verify { input } => (Command::Verify, input),
        Cmd::Evolve { input } => (Command::Evolve, input),
        Cmd::Sweep => (Command::Sweep, None),
    };
    let ctx = Context {
        config,
        out: cli.out,
        input,
        workers: cli.workers,
        seed: cli.seed,
    };
    ExitCode::from(run(command, &ctx))
}
