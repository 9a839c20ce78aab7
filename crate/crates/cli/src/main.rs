//! `zenokit` command line: predict readout-induced decay, calibrate from
//! traces, run the master-equation cross-check and related conversions.
//!
//! Each subcommand reads a JSON config, computes everything in memory and
//! only then writes its outputs (plus `manifest.json`) into `--out`. On
//! failure a JSON error goes to stderr and the exit code is 2 for bad input,
//! 3 for domain, sign, range or fit errors and 4 for integrator instability.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;
use output::Outputs;

#[derive(Parser)]
#[command(name = "zenokit", version, about = "Measurement-induced decay prediction and checks")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of `synth` configs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decay rate versus readout amplitude from a loss spectrum.
    Predict,
    /// Readout calibration from Ramsey traces.
    Calibrate,
    /// Master-equation comparison, rate map and optional trajectory.
    Oracle,
    /// Fixed-delay T1 scan to a loss spectrum.
    ConvertT1 {
        /// Delay in us; overrides the config.
        #[arg(long)]
        t_delay: Option<f64>,
    },
    /// Defect coupling and decay from a resonant swap trace.
    FitSwap,
    /// Flux-noise coefficient from echo decays.
    FitFluxNoise,
    /// Generate synthetic input data.
    Synth,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Predict => "predict",
            Command::Calibrate => "calibrate",
            Command::Oracle => "oracle",
            Command::ConvertT1 { .. } => "convert-t1",
            Command::FitSwap => "fit-swap",
            Command::FitFluxNoise => "fit-flux-noise",
            Command::Synth => "synth",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.config.as_deref().ok_or_else(|| zenokit::Error::Parse {
        path: PathBuf::from("--config"),
        message: "a config file is required".into(),
    })?;
    let (outputs, seed): (Outputs, Option<u64>) = match &cli.command {
        Command::Predict => (commands::predict(cfg)?, None),
        Command::Calibrate => (commands::calibrate(cfg)?, None),
        Command::Oracle => (commands::oracle(cfg)?, None),
        Command::ConvertT1 { t_delay } => (commands::convert_t1(cfg, *t_delay)?, None),
        Command::FitSwap => (commands::fit_swap(cfg)?, None),
        Command::FitFluxNoise => (commands::fit_flux_noise(cfg)?, None),
        Command::Synth => commands::synth(cfg, cli.seed)?,
    };
    outputs.write(&cli.out, cli.command.name(), seed)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
