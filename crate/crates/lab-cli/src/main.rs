use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use lab_cli::{run, scenarios, ConfigError, ExperimentConfig};

/// Experiments on Busemann simplices, isometry dynamics and abelian class
/// complexes.
#[derive(Parser)]
#[command(name = "lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "lab-out")]
        out: PathBuf,
    },
    /// Run the verify suite over the whole catalog.
    Verify {
        #[arg(long, default_value = "lab-out/verify")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the bundled scenarios.
    Scenarios,
}

fn threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("LAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
        ConfigError(format!("LAB_THREADS must be a positive integer, got {v:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("LAB_THREADS: {e}")))
}

fn execute(cli: Cli) -> Result<bool> {
    threads()?;
    let (cfg, out) = match cli.command {
        Command::Scenarios => {
            print!("{}", scenarios::listing());
            return Ok(true);
        }
        Command::Verify { out, seed } => (ExperimentConfig::verify_suite(seed), out),
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| ConfigError(format!("reading {}: {e}", config.display())))?;
            let cfg = ExperimentConfig::parse(&text)
                .map_err(|e| ConfigError(format!("{}: {}", config.display(), e.0)))?;
            (cfg, out)
        }
    };
    let record = run(&cfg, &out).context("writing run output")?;
    print!("{}", record.summary(&cfg));
    Ok(record.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
