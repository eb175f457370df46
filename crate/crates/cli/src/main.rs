//! `fracident`: simulate data, identify fractional models, print eliminated
//! equations and run the acceptance benchmark.
//!
//! Exit status: 0 on success, 1 on usage, configuration or I/O errors, 2 when
//! the regressor is singular, the estimates are incoherent or a benchmark
//! criterion fails.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "fracident", version, about = "Algebraic identification of fractional-order models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate input/output CSVs and a manifest of the true parameters.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate parameters from two signal CSVs; writes result.csv.
    Identify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the eliminated, normalised equation of a model.
    Lower {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria and report pass/fail per criterion.
    Benchmark {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<commands::Rejected>().is_some() {
        return 2;
    }
    match e.downcast_ref::<fracident::Error>() {
        Some(fracident::Error::Singular { .. } | fracident::Error::Coherence { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let res = match &cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(config, out, *seed),
        Command::Identify { config, out } => commands::identify(config, out),
        Command::Lower { config, out } => commands::lower(config, out.as_deref()),
        Command::Benchmark { config, out, seed } => {
            commands::benchmark(config.as_deref(), out.as_deref(), *seed)
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
