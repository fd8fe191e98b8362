//! `bechdel`: screenplay parsing, stream segmentation, scoring and
//! comparison of dialogue corpora.
//!
//! Exit codes: 0 success, 1 processing failure, 2 missing input,
//! 3 invalid arguments (including unparsable flags) or input content.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunArgs, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] bechdel_core::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::MissingInput(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Core(e) if e.is_missing_input() => 2,
            CliError::Core(e) if e.is_validation() => 3,
            CliError::Core(_) | CliError::Other(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bechdel", version, about = "Gender asymmetry metrics for dialogue corpora")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse screenplays into dialogues and score each movie.
    ParseScripts(RunArgs),
    /// Split message streams into dialogues at the fitted cutoff.
    Segment(RunArgs),
    /// Metrics for a stream corpus, its cohorts and its states.
    Score(RunArgs),
    /// Bootstrap stream scores and measure distances to movie groups.
    Compare(RunArgs),
    /// Run every stage the given inputs allow and write a report bundle.
    Report(RunArgs),
    /// Write the synthetic demo corpus.
    Synth {
        #[arg(long, short, default_value = "demo")]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 5_000)]
        messages: usize,
    },
}

fn configure(args: RunArgs) -> Result<RunConfig, CliError> {
    let cfg = RunConfig::resolve(args)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ParseScripts(a) => commands::parse_scripts(&configure(a)?),
        Command::Segment(a) => commands::segment(&configure(a)?),
        Command::Score(a) => commands::score(&configure(a)?),
        Command::Compare(a) => commands::compare(&configure(a)?),
        Command::Report(a) => commands::report(&configure(a)?),
        Command::Synth { out, seed, messages } => commands::synth(&out, seed, messages),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
