//! Resolved run configuration and the output files that embed it.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use wikihow_intent::io::{sha256_file, write_atomic, write_json_atomic, write_jsonl};
use wikihow_intent::Language;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command: the parsed flags, the seed, the
/// worker count and a hash of every input file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub language: Option<Language>,
    pub seed: u64,
    pub workers: usize,
    pub args: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

impl RunConfig {
    pub fn new(command: &'static str, args: &impl Serialize, seed: u64, workers: usize) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            language: None,
            seed,
            workers,
            args: serde_json::to_value(args)?,
            inputs: Vec::new(),
        })
    }

    pub fn language(mut self, language: Language) -> Self {
        self.language = Some(language);
        self
    }

    /// Hashes `path` (a file, or every file below a directory) into the
    /// input list.
    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let mut files = Vec::new();
        collect_files(path, &mut files).with_context(|| format!("cannot read input {}", path.display()))?;
        files.sort();
        for f in files {
            let sha256 = sha256_file(&f).with_context(|| format!("cannot hash {}", f.display()))?;
            self.inputs.push(InputDigest { path: f, sha256 });
        }
        Ok(())
    }

    pub fn log(&self) {
        match serde_json::to_string(self) {
            Ok(s) => log::info!("resolved config: {s}"),
            Err(e) => log::warn!("cannot serialise config: {e}"),
        }
    }
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    if path.is_dir() {
        for entry in std::fs::read_dir(path)? {
            collect_files(&entry?.path(), out)?;
        }
    } else {
        std::fs::metadata(path)?;
        out.push(path.to_path_buf());
    }
    Ok(())
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    run: &'a RunConfig,
    #[serde(flatten)]
    body: &'a T,
}

/// Writes `body` as a JSON document with the run config under `run`.
pub fn write_document<T: Serialize>(path: &Path, run: &RunConfig, body: &T) -> Result<()> {
    write_json_atomic(path, &Document { run, body }).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes JSON-Lines records plus a `<path>.run.json` sidecar, since the
/// record format itself has no room for the config.
pub fn write_records<T: Serialize>(path: &Path, run: &RunConfig, records: &[T]) -> Result<()> {
    write_atomic(path, |w| write_jsonl(w, records)).with_context(|| format!("cannot write {}", path.display()))?;
    let sidecar = sidecar_path(path, "run.json");
    write_json_atomic(&sidecar, run).with_context(|| format!("cannot write {}", sidecar.display()))
}

/// `out/wh_en.jsonl` + `summary.json` → `out/wh_en.summary.json`.
pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
