//! `affectguard`: batch de-identification, annotation tooling and two-stage
//! emotion inference over frame directories and WAV files.

mod audio;
mod config;
mod data;
mod exit;
mod frames;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(
    name = "affectguard",
    version,
    about = "De-identify interview media and run multimodal emotion analysis"
)]
struct Cli {
    /// TOML config file; flags and environment variables take precedence.
    #[arg(long, global = true, env = "AFFECTGUARD_CONFIG")]
    config: Option<PathBuf>,

    /// Cap on parallel workers (default: available cores).
    #[arg(long, global = true, env = "AFFECTGUARD_WORKERS")]
    workers: Option<usize>,

    /// Log filter, e.g. `info` or `affectguard=debug`.
    #[arg(long, global = true, env = "AFFECTGUARD_LOG", default_value = "info")]
    log: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Anonymize a speaker by warping LPC pole angles.
    AnonymizeAudio(audio::AnonymizeArgs),
    /// Blur face boxes in a directory of PPM frames.
    MaskFrames(frames::MaskArgs),
    /// Run multimodal inference and the judge over annotated videos.
    RunPipeline(run::RunArgs),
    /// Score a results directory against the annotations.
    Evaluate(data::EvaluateArgs),
    /// Dataset summary and NFBL class histogram.
    Stats(data::StatsArgs),
    /// Seeded class-balanced train/test split.
    Split(data::SplitArgs),
    /// Generate a synthetic annotation file at full dataset scale.
    SynthAnnotations(data::SynthArgs),
    /// Write a mock fixture file with placeholder transcripts for every request.
    ScaffoldFixtures(run::ScaffoldArgs),
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut config = config::RunConfig::load(cli.config.as_deref())?;
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(exit::coded(exit::USAGE, "--workers must be at least 1"));
    }
    config.set_workers(workers);
    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().ok();

    match cli.command {
        Command::AnonymizeAudio(a) => audio::anonymize(a, config),
        Command::MaskFrames(a) => frames::mask(a, config),
        Command::RunPipeline(a) => run::run(a, config),
        Command::Evaluate(a) => data::evaluate(a),
        Command::Stats(a) => data::stats(a),
        Command::Split(a) => data::split(a, config),
        Command::SynthAnnotations(a) => data::synth(a, config),
        Command::ScaffoldFixtures(a) => run::scaffold(a, config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let filter = EnvFilter::try_new(&cli.log).unwrap_or_else(|_| EnvFilter::new("info"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_target(false)
        .init();

    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::exit_code(&e))
        }
    }
}
