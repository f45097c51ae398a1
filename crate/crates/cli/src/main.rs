//! Batch front end: simulate, fit, cross-validate, assess and benchmark.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "mlgcp", version, about = "Multivariate log Gaussian Cox process simulation and inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if needed.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed overriding the one in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; all cores when absent. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a pattern from a benchmark scenario.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Fit the second-order model to a pattern.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Pattern CSV with columns x, y, type.
        #[arg(long)]
        pattern: PathBuf,
    },
    /// Choose the number of latent fields and the penalty by cross-validation.
    Cv {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pattern: PathBuf,
    },
    /// Compare a fit with non-parametric estimates and run the envelope test.
    Assess {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pattern: PathBuf,
        /// `fit.json` written by the fit command.
        #[arg(long)]
        fit: PathBuf,
    },
    /// Replicated simulation study.
    Bench {
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Simulate { common }
        | Command::Fit { common, .. }
        | Command::Cv { common, .. }
        | Command::Assess { common, .. }
        | Command::Bench { common } => common.clone(),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let loaded = config::load(&common.config)?;
    std::fs::create_dir_all(&common.out).map_err(|e| CliError::Io(format!("{}: {e}", common.out.display())))?;
    match cli.command {
        Command::Simulate { .. } => commands::simulate(&loaded, &common),
        Command::Fit { pattern, .. } => commands::fit(&loaded, &common, &pattern),
        Command::Cv { pattern, .. } => commands::cv(&loaded, &common, &pattern),
        Command::Assess { pattern, fit, .. } => commands::assess(&loaded, &common, &pattern, &fit),
        Command::Bench { .. } => commands::bench(&loaded, &common),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
