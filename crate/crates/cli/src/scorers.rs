//! Scorer selection shared by the scoring subcommands.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use wikihow_intent::mcq::{read_mcq, McqRecord};
use wikihow_intent::scorer::{Connection, ExternalScorer, RandomScorer, Scorer, TfIdfScorer, TrainPhase};
use wikihow_intent::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    /// TF-IDF cosine between the input and each candidate.
    Baseline,
    /// Seeded uniform scores; a chance-level reference.
    Random,
    /// A process or socket speaking the scorer protocol.
    External,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScorerArgs {
    #[arg(long, value_enum, default_value = "baseline")]
    pub scorer: ScorerKind,
    /// Command line of an external scorer, split on whitespace.
    #[arg(long, env = "WHINTENT_SCORER_CMD")]
    pub scorer_cmd: Option<String>,
    /// host:port of an external scorer listening on TCP.
    #[arg(long, env = "WHINTENT_SCORER_ADDR", conflicts_with = "scorer_cmd")]
    pub scorer_addr: Option<String>,
    /// Seconds to wait for each external response.
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,
    /// Record the external session to this file.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Ordered training phases (MCQ files), e.g. wikiHow then in-domain.
    #[arg(long = "train")]
    pub train: Vec<PathBuf>,
}

impl ScorerArgs {
    pub fn inputs(&self) -> Vec<&Path> {
        self.train.iter().map(PathBuf::as_path).collect()
    }

    fn connect(&self) -> Result<Connection> {
        let timeout = Duration::from_secs(self.timeout_secs);
        let transcript: Option<Box<dyn Write + Send>> = match &self.transcript {
            Some(p) => Some(Box::new(
                File::create(p).with_context(|| format!("cannot create transcript {}", p.display()))?,
            )),
            None => None,
        };
        if let Some(addr) = &self.scorer_addr {
            return Ok(Connection::connect_tcp(addr.as_str(), timeout, transcript)?);
        }
        let Some(cmd) = &self.scorer_cmd else {
            bail!("--scorer external needs --scorer-cmd or --scorer-addr");
        };
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let Some(program) = parts.next() else {
            bail!("--scorer-cmd is empty");
        };
        let args: Vec<String> = parts.collect();
        Ok(Connection::spawn(&program, &args, timeout, transcript)?)
    }

    /// Builds the scorer and runs every `--train` phase on it, in order.
    ///
    /// `fit_texts` seeds the baseline's vocabulary when no phase is given.
    pub fn build(&self, language: Language, seed: u64, fit_texts: &[&str]) -> Result<Box<dyn Scorer>> {
        let mut scorer: Box<dyn Scorer> = match self.scorer {
            ScorerKind::Baseline => Box::new(TfIdfScorer::fit(fit_texts.iter().copied(), language)),
            ScorerKind::Random => Box::new(RandomScorer::new(seed)),
            ScorerKind::External => {
                let conn = self.connect()?;
                let name = self
                    .scorer_cmd
                    .clone()
                    .or_else(|| self.scorer_addr.clone())
                    .unwrap_or_else(|| "external".into());
                Box::new(ExternalScorer::new(name, conn))
            }
        };
        for path in &self.train {
            let phase = load_phase(path)?;
            log::info!("training phase `{}`: {} records", phase.name, phase.records.len());
            scorer.train(&phase)?;
        }
        Ok(scorer)
    }
}

pub fn read_records(path: &Path) -> Result<Vec<McqRecord>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_mcq(BufReader::new(f)).with_context(|| format!("invalid multiple-choice file {}", path.display()))
}

fn load_phase(path: &Path) -> Result<TrainPhase> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "phase".into());
    Ok(TrainPhase {
        name,
        // the scorer may run in another directory
        source: Some(path.canonicalize().unwrap_or_else(|_| path.to_path_buf())),
        records: read_records(path)?,
    })
}
