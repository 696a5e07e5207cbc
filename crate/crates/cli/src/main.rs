//! `hotcbs`: figure reproduction and parameter sweeps for coherent
//! backscattering in hot atomic vapours.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 for a numerical
//! failure, 1 for i/o errors.

mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, RunConfig};
use error::CliError;
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "hotcbs", version, about = "Coherent backscattering in hot atomic vapours")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat TOML configuration; keys not given take the subcommand defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Base seed of the Monte Carlo streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo photons per run.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Relative tolerance of the quadratures.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Peak contrast C(0) against kv̄/Γ: quadrature, asymptote and Monte Carlo.
    Fig2,
    /// Angular profile of the peak for double and triple scattering.
    Fig3,
    /// γ_B ratio, γ_C ratio and amplification over cell radius and thickness, as matrices.
    Fig4,
    /// Cold-atom contrast against kv̄τ.
    Cold,
    /// Vector contrast for a transition and polarisation channel.
    Contrast,
    /// One Monte Carlo transport run, written as JSON.
    Mc,
    /// Cell ratios over a radius/thickness grid, one line per cell.
    GeometryMap,
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::Fig2 => Command::Fig2,
            Sub::Fig3 => Command::Fig3,
            Sub::Fig4 => Command::Fig4,
            Sub::Cold => Command::Cold,
            Sub::Contrast => Command::Contrast,
            Sub::Mc => Command::Mc,
            Sub::GeometryMap => Command::GeometryMap,
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    config.seed = common.seed.or(config.seed);
    config.samples = common.samples.or(config.samples);
    config.threads = common.threads.or(config.threads);
    config.rel_tolerance = common.tolerance.or(config.rel_tolerance);
    Ok(config)
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let command = cli.command.command();
    let config = load(&cli.common)?.resolve(command)?;
    let out = Output {
        dir: &cli.common.out,
        command,
        config: &config,
    };
    match command {
        Command::Fig2 => commands::fig2(&config, &out),
        Command::Fig3 => commands::fig3(&config, &out),
        Command::Fig4 => commands::fig4(&config, &out),
        Command::Cold => commands::cold(&config, &out),
        Command::Contrast => commands::contrast(&config, &out),
        Command::Mc => commands::mc(&config, &out),
        Command::GeometryMap => commands::geometry_map_cmd(&config, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hotcbs {}: {e}", cli.command.command().name());
            ExitCode::from(e.exit_code())
        }
    }
}
