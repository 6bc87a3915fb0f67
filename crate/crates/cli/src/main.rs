use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vie::error::VieError;
use vie::experiment::{fmt9, run, run_convergence, run_mie, ExperimentConfig};

/// Environment variable holding the worker-thread count.
const THREADS_ENV: &str = "VIE_THREADS";

#[derive(Parser)]
#[command(name = "vie", version, about = "Volume-integral-equation electromagnetic scattering solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configured experiment and write its outputs.
    Run { config: PathBuf },
    /// Repeat the experiment over several grid resolutions.
    Converge {
        config: PathBuf,
        /// Grid spacings, coarse to fine.
        #[arg(long, num_args = 1.., value_name = "H")]
        levels: Vec<f64>,
        /// Resolutions in cells per diameter (alternative to --levels).
        #[arg(long, num_args = 1.., value_name = "N", conflicts_with = "levels")]
        cells_per_diameter: Vec<f64>,
    },
    /// Mie series reference for a sphere config, without solving.
    Mie { config: PathBuf },
}

fn exit_code(e: &VieError) -> u8 {
    match e {
        VieError::NonConvergence { .. } => 2,
        _ => 1,
    }
}

fn configure_threads() -> Result<(), VieError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| VieError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| VieError::Config(e.to_string()))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), VieError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = run(&cfg)?;
            println!("{}", summary.line());
        }
        Command::Converge { config, levels, cells_per_diameter } => {
            let cfg = ExperimentConfig::load(&config)?;
            let hs: Vec<f64> = if !levels.is_empty() {
                levels
            } else if !cells_per_diameter.is_empty() {
                let d = cfg.build_shape()?.bounding_box().min_extent();
                cells_per_diameter.iter().map(|n| d / n).collect()
            } else {
                return Err(VieError::Config("converge needs --levels or --cells-per-diameter".into()));
            };
            let rep = run_convergence(&cfg, &hs)?;
            for row in &rep.levels {
                println!(
                    "h={} M={} sigma_scat={} diff={} order={}",
                    fmt9(row.h),
                    row.num_basis,
                    fmt9(row.sigma_scat),
                    row.far_field_difference.map(fmt9).unwrap_or_else(|| "-".into()),
                    row.empirical_order.map(fmt9).unwrap_or_else(|| "-".into())
                );
            }
            println!("monotone_decrease={}", rep.monotone_decrease);
        }
        Command::Mie { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let s = run_mie(&cfg)?;
            println!(
                "ka={} L={} sigma_scat={} sigma_ext={}",
                fmt9(s.size_parameter),
                s.truncation,
                fmt9(s.sigma_scat),
                fmt9(s.sigma_ext)
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
