mod commands;
mod error;
mod manifest;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use amodal_core::par::Execution;
use clap::{Parser, Subcommand};

use commands::{InpaintArgs, SweepArgs, SynthArgs};
use error::{CliError, EXIT_INVALID, EXIT_IO};
use pipeline::{DenoiserChoice, RegionMode};

#[derive(Parser, Debug)]
#[command(name = "amodal", version, about = "Occluded-region identification and multi-regional inpainting")]
struct Cli {
    /// Process batch scenes one at a time.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split the occluder mask into primary and secondary regions.
    Identify {
        manifest: PathBuf,
        out: PathBuf,
        /// Dilation radius for the occlusion boundary [default: scaled from 3 px at 512 width]
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, value_enum, default_value_t = RegionMode::Region)]
        mode: RegionMode,
    },
    /// Complete the occludee with the two-phase mask schedule.
    Inpaint {
        manifest: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Target image for the oracle denoiser [default: the manifest's ground_truth_image]
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RegionMode::Region)]
        mode: RegionMode,
    },
    /// mIoU per strength, grouped by occlusion level.
    Sweep {
        manifest_dir: PathBuf,
        out: PathBuf,
        /// Comma-separated strengths to evaluate.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        strengths: Vec<f64>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Keep scenes whose occlusion and visible area fall inside the dataset bounds.
    Filter { dataset_dir: PathBuf, out: PathBuf },
    /// Write a synthetic scene suite as manifest directories.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        min_occlusion: f64,
        #[arg(long, default_value_t = 0.7)]
        max_occlusion: f64,
        #[arg(long, default_value_t = 64)]
        canvas: usize,
    },
}

#[derive(clap::Args, Debug)]
struct Sampling {
    /// Fraction of steps during which the secondary region is repainted.
    #[arg(short = 'r', long, default_value_t = 0.5)]
    strength: f64,
    /// Inference steps.
    #[arg(short = 'T', long, default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Longest side of the sampling canvas.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, value_enum, default_value_t = DenoiserChoice::Oracle)]
    denoiser: DenoiserChoice,
    #[arg(long)]
    radius: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match cli.command {
        Command::Identify { manifest, out, radius, mode } => commands::identify(&manifest, &out, radius, mode),
        Command::Inpaint { manifest, out, sampling, target, mode } => {
            let args = InpaintArgs {
                strength: sampling.strength,
                steps: sampling.steps,
                seed: sampling.seed,
                resolution: sampling.resolution,
                denoiser: sampling.denoiser,
                radius: sampling.radius,
                mode,
            };
            commands::inpaint(&manifest, &out, &args, target.as_deref())
        }
        Command::Sweep { manifest_dir, out, strengths, sampling } => {
            let args = SweepArgs {
                strengths,
                steps: sampling.steps,
                seed: sampling.seed,
                resolution: sampling.resolution,
                denoiser: sampling.denoiser,
                radius: sampling.radius,
            };
            commands::sweep(&manifest_dir, &out, &args, exec)
        }
        Command::Filter { dataset_dir, out } => commands::filter(&dataset_dir, &out, exec),
        Command::Synth { out, count, seed, min_occlusion, max_occlusion, canvas } => {
            let args = SynthArgs { count, seed, min_occlusion, max_occlusion, canvas };
            commands::synth(&out, &args, exec)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            debug_assert!(e.code == EXIT_IO || e.code == EXIT_INVALID);
            ExitCode::from(e.code)
        }
    }
}
