use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcomb::commands;
use qcomb::config::load_config;
use qcomb::Result;

#[derive(Parser)]
#[command(name = "qcomb", version, about = "Biphoton frequency-comb simulator and HOM fitter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of omega_minus grid points (overrides grid.points_minus).
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Random seed (overrides seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Measured tau_s,counts data for `fit` (overrides fit.data).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Joint spectral intensity grid and state metadata.
    Jsi,
    /// HOM coincidence trace and visibility report.
    Hom,
    /// Exchange symmetry and visibility versus pump detuning.
    Sweep,
    /// Fit the model to measured HOM counts.
    Fit,
    /// Synthetic HOM counts from the configured state.
    Simulate,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| qcomb::Error::Config("--config <path> is required".into()))?;
    let mut config = load_config(path)?;
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(points) = cli.points {
        config.grid.minus.points = points;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    match cli.command {
        Command::Jsi => commands::run_jsi(&config),
        Command::Hom => commands::run_hom(&config),
        Command::Sweep => commands::run_sweep(&config),
        Command::Fit => commands::run_fit(&config, cli.data.as_deref()),
        Command::Simulate => commands::run_simulate(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
