mod commands;
mod config;
mod error;
mod wav;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::DesignConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "mdft", version, about = "Uniform and non-uniform MDFT filter bank design and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Design config (key = value lines, edges as fractions of pi).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output_dir from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Frequency grid points for response and spectrum CSVs.
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// Build plans that merge the aliasing channel.
    #[arg(long)]
    allow_alias: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Design the prototype; write coefficients and response CSVs.
    Design(Common),
    /// Merge channels per the config plan; write filters and validation report.
    Merge(Common),
    /// Run a round trip on the configured probe or WAV input.
    Simulate(Common),
    /// Predicted vs empirical aliasing channel for each M.
    Sweep {
        #[arg(required = true)]
        channels: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List valid merge plans for M channels.
    Enumerate {
        channels: usize,
        #[arg(long, default_value_t = usize::MAX)]
        max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn context(c: Common) -> CliResult<Context> {
    if c.grid < 2 {
        return Err(CliError::Validation("--grid needs at least 2 points".into()));
    }
    let config = DesignConfig::load(&c.config)?;
    let out = c.out.or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    Ok(Context { config, out, grid: c.grid, allow_alias: c.allow_alias })
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Design(c) => commands::design(&context(c)?),
        Command::Merge(c) => commands::merge(&context(c)?),
        Command::Simulate(c) => commands::simulate(&context(c)?),
        Command::Sweep { channels, out } => commands::sweep(&channels, out.as_deref()),
        Command::Enumerate { channels, max, out } => commands::enumerate(channels, max, out.as_deref()),
    }
}

fn main() -> ExitCode {
    // Usage errors count as validation failures; clap's own status 2 is
    // reserved for numeric failures here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
