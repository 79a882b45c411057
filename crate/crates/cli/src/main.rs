//! `whintent`: build goal/step datasets from wikiHow dumps, cast intent
//! benchmarks into multiple-choice files and evaluate scorers on them.
//!
//! Exit codes: 0 on success, 1 on invalid input or usage, 2 when a scorer
//! breaks the wire protocol.

mod commands;
mod run;
mod scorers;

use std::fmt;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use wikihow_intent::metrics::MetricsError;
use wikihow_intent::parallel::{available_workers, with_workers};
use wikihow_intent::scorer::ScorerError;
use wikihow_intent::seed::DEFAULT_SEED;

use commands::Globals;

#[derive(Debug, Parser)]
#[command(name = "whintent", version, about = "wikiHow goal/step datasets and multiple-choice intent evaluation")]
struct Cli {
    /// Seed for every random decision.
    #[arg(long, global = true, env = "WHINTENT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (default: all logical cores).
    #[arg(long, global = true, env = "WHINTENT_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the 4-choice goal/step dataset from an article dump.
    Build(commands::BuildArgs),
    /// Cast a benchmark's published files into multiple-choice files.
    Cast(commands::CastArgs),
    /// Score a multiple-choice file and write an accuracy report.
    Eval(commands::EvalArgs),
    /// Accuracy against training-set size, repeated per size.
    Curve(commands::CurveArgs),
    /// One-sided t-test of repeated accuracies against a baseline.
    Significance(commands::SignificanceArgs),
    /// Rank each held-out step against its nearest goals.
    Opendomain(commands::OpenDomainArgs),
    /// Serve the TF-IDF baseline over the scorer protocol on stdin/stdout.
    Serve(commands::ServeArgs),
    /// Check a recorded scorer session against the protocol.
    CheckTranscript(commands::CheckTranscriptArgs),
}

/// A scorer misbehaved; maps to exit code 2.
#[derive(Debug)]
pub struct ProtocolFailure(pub String);

impl fmt::Display for ProtocolFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "protocol failure: {}", self.0)
    }
}

impl std::error::Error for ProtocolFailure {}

fn is_protocol(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<ProtocolFailure>()
            || e.downcast_ref::<ScorerError>().is_some_and(ScorerError::is_protocol)
            || matches!(e.downcast_ref::<MetricsError>(), Some(MetricsError::Scorer(s)) if s.is_protocol())
            || e.downcast_ref::<wikihow_intent::Error>().is_some_and(wikihow_intent::Error::is_protocol)
    })
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = Globals {
        seed: cli.seed,
        workers: cli.workers.unwrap_or_else(available_workers),
    };
    match &cli.command {
        Command::Build(a) => commands::build(a, g),
        Command::Cast(a) => commands::cast(a, g),
        Command::Eval(a) => commands::eval(a, g),
        Command::Curve(a) => commands::curve(a, g),
        Command::Significance(a) => commands::significance(a, g),
        Command::Opendomain(a) => commands::opendomain(a, g),
        Command::Serve(a) => commands::serve_baseline(a),
        Command::CheckTranscript(a) => commands::check_transcript(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(1);
    }
    match with_workers(cli.workers, || dispatch(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_protocol(&e) { 2 } else { 1 })
        }
    }
}
