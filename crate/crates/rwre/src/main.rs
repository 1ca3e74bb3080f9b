use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rwre::checks::law_kernel;
use rwre::commands::{run, Command, Context};
use rwre::config::{ExperimentConfig, Format};
use rwre::exit;
use rwre::parallel::Rayon;

/// Random walks in random environments on the integer lattice.
///
/// Settings come from a JSON config (missing fields take defaults); flags
/// given on the command line override the config.
#[derive(Debug, Parser)]
#[command(name = "rwre", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Top-level seed; every replica seed is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Only run validate checks whose group or label matches.
    #[arg(long, global = true)]
    filter: Option<String>,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(|e| e.to_string())?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::CONFIG as u8);
        }
    };
    let runner = match Rayon::new(cli.threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(exit::FAILURE as u8);
        }
    };
    let ctx = Context { config: &config, runner: &runner, filter: cli.filter.as_deref(), kernels: &law_kernel };
    match run(cli.command, &ctx) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
