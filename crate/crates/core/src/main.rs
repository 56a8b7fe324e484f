//! `kinfer`: batch CLI for simulating the radial heat problem, generating
//! synthetic observations, running the constrained exchange sampler, and
//! producing diagnostic and uncertainty-propagation outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kinfer::cli::commands::{
    cmd_diagnose, cmd_generate_data, cmd_infer, cmd_propagate, cmd_simulate, default_dataset_path,
};
use kinfer::cli::config::{Overrides, RunConfig};
use kinfer::Result;

#[derive(Parser)]
#[command(name = "kinfer", version, about = "Time-dependent conductivity inference toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML configuration file; defaults apply if omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config file)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config file; required in one of the two)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampler steps (overrides the config file)
    #[arg(long)]
    steps: Option<u64>,
    /// Signal-to-noise ratio (overrides the config file)
    #[arg(long)]
    snr: Option<f64>,
    /// Generate observations without measurement noise
    #[arg(long)]
    no_noise: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the direct problem with the true conductivity
    Simulate(CommonArgs),
    /// Generate a synthetic observation dataset
    GenerateData(CommonArgs),
    /// Run the constrained exchange sampler against a dataset
    Infer {
        #[command(flatten)]
        common: CommonArgs,
        /// Dataset file (defaults to <out>/dataset.csv)
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Render diagnostics from an existing inference run
    Diagnose {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory holding the chain files (defaults to <out>)
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Propagate observation noise through the direct problem
    Propagate(CommonArgs),
}

fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: common.seed,
        steps: common.steps,
        snr: common.snr,
        out: common.out.clone(),
        no_noise: common.no_noise,
    });
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = load_config(&common)?;
            let out = cfg.out_dir()?;
            cmd_simulate(&cfg, out)
        }
        Command::GenerateData(common) => {
            let cfg = load_config(&common)?;
            let out = cfg.out_dir()?;
            cmd_generate_data(&cfg, out)
        }
        Command::Infer { common, dataset } => {
            let cfg = load_config(&common)?;
            let out = cfg.out_dir()?;
            let dataset = default_dataset_path(dataset.as_deref(), out);
            cmd_infer(&cfg, &dataset, out)
        }
        Command::Diagnose { common, chain } => {
            let cfg = load_config(&common)?;
            let out = cfg.out_dir()?;
            let chain = chain.unwrap_or_else(|| out.to_path_buf());
            cmd_diagnose(&cfg, &chain, out)
        }
        Command::Propagate(common) => {
            let cfg = load_config(&common)?;
            let out = cfg.out_dir()?;
            cmd_propagate(&cfg, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
