//! `fracmhd`: runs one experiment from a TOML config.
//!
//! Exit status is 0 when every assertion of the subcommand holds, 2 when one
//! fails, and 1 on a configuration or runtime error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Context;
use config::{ConfigError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "fracmhd", version, about = "Fractional magnetic relaxation experiments")]
struct Cli {
    /// overrides the config `seed`
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// overrides the config `output_dir`
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the truncated system; writes diagnostics.csv, summary.json and snapshots
    Simulate { config: PathBuf },
    /// Solve the fractional Stokes system for a tensor load
    Stokes { config: PathBuf },
    /// Fourier identity quadratures and the kernel window comparison
    KernelCheck { config: PathBuf },
    /// Existence and uniqueness regime of (d, alpha, beta)
    Regime { config: PathBuf },
    /// Empirical ratios of an inequality at M and 2M
    EstimateCheck { config: PathBuf },
    /// L2 differences between cutoffs R and 2R
    Convergence { config: PathBuf },
    /// Perturbation growth against the Gronwall envelope
    Stability { config: PathBuf },
    /// Right inverse of the divergence on the smooth corpus
    BogovskiiCheck { config: PathBuf },
}

fn run(cli: Cli) -> Result<bool, ConfigError> {
    let (name, path, body): (&str, &PathBuf, fn(&Context) -> Result<bool, ConfigError>) = match &cli.command {
        Command::Simulate { config } => ("simulate", config, commands::simulate_cmd),
        Command::Stokes { config } => ("stokes", config, commands::stokes_cmd),
        Command::KernelCheck { config } => ("kernel-check", config, commands::kernel_cmd),
        Command::Regime { config } => ("regime", config, commands::regime_cmd),
        Command::EstimateCheck { config } => ("estimate-check", config, commands::estimate_cmd),
        Command::Convergence { config } => ("convergence", config, commands::convergence_cmd),
        Command::Stability { config } => ("stability", config, commands::stability_cmd),
        Command::BogovskiiCheck { config } => ("bogovskii-check", config, commands::bogovskii_cmd),
    };
    let config = ExperimentConfig::load(path)?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let out = cli
        .output_dir
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| ConfigError(format!("{}: {e}", out.display())))?;
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let ctx = Context { config, base, seed, out };
    let passed = body(&ctx)?;
    commands::announce(&format!("{name}: {}", if passed { "PASS" } else { "FAIL" }));
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors; 2 is reserved for failed assertions
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
