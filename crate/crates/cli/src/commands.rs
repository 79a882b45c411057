//! One function per subcommand.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use wikihow_intent::benchmark::{load_benchmark, Dataset, Split, DEFAULT_CURVE_SIZES};
use wikihow_intent::corpus::{parse_corpus, Corpus, ParseReport, PrefixConfig};
use wikihow_intent::mcq::McqRecord;
use wikihow_intent::metrics::{
    build_learning_curve, format_table, predict_records, report_from_outcomes, t_test_one_sample_one_tailed, Setting,
};
use wikihow_intent::open_domain::{
    build_instances, evaluate_open_domain, hold_out, Embedder, ExternalEmbedder, GoalIndex, OneHotEmbedder,
    TfIdfEmbedder, DEFAULT_CANDIDATES, DEFAULT_HOLDOUT,
};
use wikihow_intent::pretrain::{build_dataset, BuildOptions, BuildSummary, DEFAULT_FALLBACK_THRESHOLD};
use wikihow_intent::scorer::protocol::{serve, validate_transcript};
use wikihow_intent::scorer::{Scorer, ScorerError, TfIdfScorer};
use wikihow_intent::Language;

use crate::run::{sidecar_path, write_document, write_records, RunConfig};
use crate::scorers::{read_records, ScorerArgs, ScorerKind};
use crate::ProtocolFailure;

/// Shared by every command: seed and worker count, already resolved.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub seed: u64,
    pub workers: usize,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn load_corpus(path: &Path, language: Language, prefixes: &[String]) -> Result<(Corpus, ParseReport)> {
    let mut config = PrefixConfig::default();
    if !prefixes.is_empty() {
        config.set(language, prefixes.to_vec());
    }
    let (corpus, report) = parse_corpus(open(path)?, language, &config)
        .with_context(|| format!("cannot parse corpus {}", path.display()))?;
    log::info!(
        "parsed {} articles from {} lines ({} malformed, {} without a goal, {} dangling links)",
        report.articles,
        report.lines,
        report.malformed,
        report.invalid_goal,
        report.dangling_links
    );
    Ok((corpus, report))
}

/// Reads article ids, one per line, or `article_id` fields of JSON lines.
fn read_id_list(path: &Path) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    for line in open(path)?.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(t).with_context(|| format!("bad line in {}", path.display()))?;
            match v.get("article_id").or_else(|| v.get("id")).and_then(|x| x.as_str()) {
                Some(id) => ids.push(id.to_string()),
                None => bail!("{}: JSON line without `article_id`", path.display()),
            }
        } else {
            ids.push(t.to_string());
        }
    }
    Ok(ids)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildArgs {
    /// Article dump, one JSON object per line.
    #[arg(long, env = "WHINTENT_CORPUS")]
    pub corpus: PathBuf,
    #[arg(long)]
    pub lang: Language,
    /// Output dataset (JSON-Lines); a `.summary.json` sidecar is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Overlap at or above which a random fallback negative is rejected.
    #[arg(long, default_value_t = DEFAULT_FALLBACK_THRESHOLD)]
    pub fallback_threshold: f64,
    /// Title prefix to strip (repeatable); replaces the language default.
    #[arg(long = "prefix")]
    pub prefixes: Vec<String>,
    /// Article ids to leave out, e.g. an open-domain holdout file.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    /// Also write the per-article sampling traces here.
    #[arg(long)]
    pub traces: Option<PathBuf>,
}

#[derive(Serialize)]
struct BuildDocument<'a> {
    summary: &'a BuildSummary,
    parse: &'a ParseReport,
    excluded: usize,
}

pub fn build(args: &BuildArgs, g: Globals) -> Result<()> {
    if !(0.0..=1.0).contains(&args.fallback_threshold) {
        bail!("--fallback-threshold must be in [0, 1]");
    }
    let mut run = RunConfig::new("build", args, g.seed, g.workers)?.language(args.lang);
    run.add_input(&args.corpus)?;
    if let Some(p) = &args.exclude {
        run.add_input(p)?;
    }
    run.log();
    let (mut corpus, parse) = load_corpus(&args.corpus, args.lang, &args.prefixes)?;
    let mut excluded = 0;
    if let Some(p) = &args.exclude {
        let ids = read_id_list(p)?;
        let before = corpus.len();
        corpus = corpus.without(ids.iter().map(String::as_str));
        excluded = before - corpus.len();
        log::info!("excluded {excluded} held-out articles");
    }
    let built = build_dataset(
        &corpus,
        &BuildOptions {
            seed: g.seed,
            fallback_threshold: args.fallback_threshold,
        },
    )?;
    let s = &built.summary;
    log::info!(
        "{} examples from {} articles ({} without steps, {} needed random fallback); reference size {}",
        s.examples,
        s.articles,
        s.skipped_no_steps,
        s.exhausted_fallbacks,
        s.reference_examples
    );
    write_records(&args.out, &run, &built.examples)?;
    write_document(
        &sidecar_path(&args.out, "summary.json"),
        &run,
        &BuildDocument {
            summary: s,
            parse: &parse,
            excluded,
        },
    )?;
    if let Some(t) = &args.traces {
        write_records(t, &run, &built.traces)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CastArgs {
    #[arg(long)]
    pub dataset: Dataset,
    /// Directory holding the dataset's published files.
    #[arg(long, env = "WHINTENT_BENCHMARK_ROOT")]
    pub root: PathBuf,
    /// One `<dataset>_<split>.jsonl` per split is written here.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct CastDocument {
    dataset: Dataset,
    stats: wikihow_intent::benchmark::DatasetStats,
    reference_stats: wikihow_intent::benchmark::DatasetStats,
    evaluation_split: Split,
    chance_rate: f64,
    expected_chance: f64,
    single_candidate_fraction: f64,
    files: Vec<PathBuf>,
}

pub fn cast(args: &CastArgs, g: Globals) -> Result<()> {
    let mut run = RunConfig::new("cast", args, g.seed, g.workers)?.language(args.dataset.language());
    let bench = load_benchmark(args.dataset, &args.root)?;
    for f in args.dataset.manifest(&args.root) {
        if f.exists() {
            run.add_input(&f)?;
        }
    }
    run.log();
    fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let mut files = Vec::new();
    for split in [Split::Train, Split::Validation, Split::Test] {
        let records: Vec<McqRecord> = bench.split(split).iter().map(McqRecord::from).collect();
        if records.is_empty() {
            continue;
        }
        let path = args.out_dir.join(format!("{}_{}.jsonl", args.dataset.name(), split.name()));
        write_records(&path, &run, &records)?;
        log::info!("{}: {} records", path.display(), records.len());
        files.push(path);
    }
    let reference = args.dataset.reference_stats();
    if bench.stats != reference {
        log::warn!("split sizes {:?} differ from the published {:?}", bench.stats, reference);
    }
    write_document(
        &args.out_dir.join(format!("{}.cast.json", args.dataset.name())),
        &run,
        &CastDocument {
            dataset: args.dataset,
            stats: bench.stats,
            reference_stats: reference,
            evaluation_split: args.dataset.evaluation_split(),
            chance_rate: args.dataset.chance_rate(),
            expected_chance: bench.expected_chance(),
            single_candidate_fraction: bench.single_candidate_fraction(),
            files,
        },
    )
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Multiple-choice file to score.
    #[arg(long, env = "WHINTENT_DATA")]
    pub data: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value = "ID")]
    pub setting: Setting,
    /// Defaults to the dataset named in the records.
    #[arg(long)]
    pub dataset: Option<Dataset>,
    /// Defaults to the records' language, then the dataset's.
    #[arg(long)]
    pub lang: Option<Language>,
    /// Per-instance predictions (JSON-Lines).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Print an accuracy table to stdout.
    #[arg(long)]
    pub table: bool,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(Serialize)]
struct PredictionLine<'a> {
    id: &'a str,
    predicted: Option<usize>,
    gold: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

fn check_phases(setting: Setting, scorer: &ScorerArgs) {
    if scorer.scorer == ScorerKind::External && setting.uses_wikihow() && scorer.train.is_empty() {
        log::warn!("setting {setting} normally starts with a wikiHow training phase; none was given");
    }
}

pub fn eval(args: &EvalArgs, g: Globals) -> Result<()> {
    let records = read_records(&args.data)?;
    if records.is_empty() {
        bail!("{} holds no records", args.data.display());
    }
    let dataset = args.dataset.or(records[0].dataset);
    let language = args
        .lang
        .or(records[0].language)
        .or(dataset.map(Dataset::language))
        .unwrap_or(Language::En);
    let mut run = RunConfig::new("eval", args, g.seed, g.workers)?.language(language);
    run.add_input(&args.data)?;
    for p in args.scorer.inputs() {
        run.add_input(p)?;
    }
    run.log();
    check_phases(args.setting, &args.scorer);
    let contexts: Vec<&str> = records.iter().map(|r| r.context.as_str()).collect();
    let scorer = args.scorer.build(language, g.seed, &contexts)?;
    let outcomes = predict_records(&records, scorer.as_ref());
    let report = report_from_outcomes(&records, &outcomes, scorer.name(), dataset, args.setting)?;
    log::info!(
        "accuracy {:.6} on {} instances ({} failures)",
        report.accuracy,
        report.n_instances,
        report.failures
    );
    write_document(&args.report, &run, &report)?;
    if let Some(p) = &args.predictions {
        let lines: Vec<PredictionLine> = records
            .iter()
            .zip(&outcomes)
            .map(|(r, o)| PredictionLine {
                id: &r.id,
                predicted: o.prediction.predicted,
                gold: o.prediction.gold,
                error: o.error.as_deref(),
            })
            .collect();
        write_records(p, &run, &lines)?;
    }
    if args.table {
        print!("{}", format_table(std::slice::from_ref(&report)));
    }
    if report.failures > 0 {
        return Err(ProtocolFailure(format!(
            "{} of {} requests failed; first: {}",
            report.failures,
            report.n_instances,
            report.failure_samples.first().map(String::as_str).unwrap_or("?")
        ))
        .into());
    }
    Ok(())
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().with_context(|| format!("bad size `{x}` in --sizes")))
        .collect()
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long)]
    pub dataset: Dataset,
    #[arg(long, env = "WHINTENT_BENCHMARK_ROOT")]
    pub root: PathBuf,
    #[arg(long, default_value = "ID")]
    pub setting: Setting,
    /// Comma-separated training-set sizes.
    #[arg(long, default_value = "10,50,100,500,1000")]
    pub sizes: String,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

pub fn curve(args: &CurveArgs, g: Globals) -> Result<()> {
    let language = args.dataset.language();
    let sizes = parse_sizes(&args.sizes)?;
    let mut run = RunConfig::new("curve", args, g.seed, g.workers)?.language(language);
    let bench = load_benchmark(args.dataset, &args.root)?;
    for f in args.dataset.manifest(&args.root) {
        if f.exists() {
            run.add_input(&f)?;
        }
    }
    for p in args.scorer.inputs() {
        run.add_input(p)?;
    }
    run.log();
    check_phases(args.setting, &args.scorer);
    if sizes.as_slice() == DEFAULT_CURVE_SIZES.as_slice() {
        log::info!("using the default size grid");
    }
    let mut scorer_args = args.scorer.clone();
    if scorer_args.transcript.take().is_some() {
        log::warn!("--transcript is ignored by curve: every cell opens its own session");
    }
    let seed = g.seed;
    let factory = move || -> Result<Box<dyn Scorer>, ScorerError> {
        scorer_args
            .build(language, seed, &[])
            .map_err(|e| match e.downcast::<ScorerError>() {
                Ok(se) => se,
                Err(other) => ScorerError::Training {
                    scorer: "factory".into(),
                    message: format!("{other:#}"),
                },
            })
    };
    let curve = build_learning_curve(&bench, args.setting, &sizes, args.repeats, g.seed, &factory)?;
    for p in &curve.points {
        log::info!("size {:>5}: mean accuracy {:.4} over {} repeats", p.size, p.mean_accuracy, p.accuracies.len());
    }
    write_document(&args.out, &run, &curve)?;
    let failures: usize = curve.points.iter().map(|p| p.failures).sum();
    if failures > 0 {
        return Err(ProtocolFailure(format!("{failures} score requests failed across the curve")).into());
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SignificanceArgs {
    /// JSON list of accuracies, a list of reports with an `accuracy` field,
    /// or an object holding such a list under `accuracies` or `repeats`.
    #[arg(long)]
    pub runs: PathBuf,
    /// Accuracy to beat, e.g. the previous state of the art.
    #[arg(long)]
    pub baseline: f64,
    /// Write the result here as well as printing it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Runs {
    Numbers(Vec<f64>),
    Reports(Vec<Accuracy>),
    Wrapped {
        #[serde(alias = "repeats")]
        accuracies: Vec<f64>,
    },
}

#[derive(Deserialize)]
struct Accuracy {
    accuracy: f64,
}

pub fn significance(args: &SignificanceArgs, g: Globals) -> Result<()> {
    let mut run = RunConfig::new("significance", args, g.seed, g.workers)?;
    run.add_input(&args.runs)?;
    run.log();
    let runs: Runs = serde_json::from_reader(open(&args.runs)?)
        .with_context(|| format!("{}: expected a list of accuracies", args.runs.display()))?;
    let samples = match runs {
        Runs::Numbers(v) | Runs::Wrapped { accuracies: v } => v,
        Runs::Reports(v) => v.into_iter().map(|r| r.accuracy).collect(),
    };
    let result = t_test_one_sample_one_tailed(&samples, args.baseline)?;
    log::info!(
        "mean {:.4} vs baseline {:.4}: p = {:.3e}, significant = {}",
        result.mean,
        result.baseline,
        result.p_value,
        result.significant
    );
    println!("{}", serde_json::to_string_pretty(&result)?);
    if let Some(out) = &args.out {
        write_document(out, &run, &result)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    Tfidf,
    Onehot,
    External,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OpenDomainArgs {
    #[arg(long, env = "WHINTENT_CORPUS")]
    pub corpus: PathBuf,
    #[arg(long)]
    pub lang: Language,
    /// Steps to hold out.
    #[arg(long, default_value_t = DEFAULT_HOLDOUT)]
    pub holdout: usize,
    /// Candidate goals per step, gold included.
    #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
    pub candidates: usize,
    #[arg(long, value_enum, default_value = "tfidf")]
    pub embedder: EmbedderKind,
    /// Command line of an external embedder, split on whitespace.
    #[arg(long)]
    pub embedder_cmd: Option<String>,
    #[arg(long = "prefix")]
    pub prefixes: Vec<String>,
    #[arg(long)]
    pub report: PathBuf,
    /// Held-out pairs (JSON-Lines); pass to `build --exclude`.
    #[arg(long)]
    pub holdout_out: Option<PathBuf>,
    /// The ranked instances (JSON-Lines).
    #[arg(long)]
    pub instances_out: Option<PathBuf>,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

pub fn opendomain(args: &OpenDomainArgs, g: Globals) -> Result<()> {
    let mut run = RunConfig::new("opendomain", args, g.seed, g.workers)?.language(args.lang);
    run.add_input(&args.corpus)?;
    for p in args.scorer.inputs() {
        run.add_input(p)?;
    }
    run.log();
    let (corpus, _) = load_corpus(&args.corpus, args.lang, &args.prefixes)?;
    let holdout = hold_out(&corpus, args.holdout, g.seed)?;
    let goals: Vec<&str> = corpus
        .articles()
        .iter()
        .map(|a| a.goal.as_str())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    let embedder: Box<dyn Embedder> = match args.embedder {
        EmbedderKind::Tfidf => Box::new(TfIdfEmbedder::fit(goals.iter().copied(), args.lang)),
        EmbedderKind::Onehot => Box::new(OneHotEmbedder::new(goals.iter().copied())),
        EmbedderKind::External => {
            let Some(cmd) = &args.embedder_cmd else {
                bail!("--embedder external needs --embedder-cmd");
            };
            let mut parts = cmd.split_whitespace().map(str::to_string);
            let program = parts.next().context("--embedder-cmd is empty")?;
            Box::new(ExternalEmbedder::spawn(&program, &parts.collect::<Vec<_>>())?)
        }
    };
    let index = GoalIndex::build(goals.iter().copied(), embedder.as_ref())?;
    log::info!("indexed {} distinct goals; ranking {} held-out steps", index.len(), holdout.pairs.len());
    let instances = build_instances(&holdout.pairs, &index, args.candidates, embedder.as_ref())?;
    let scorer: Box<dyn Scorer> = match args.scorer.scorer {
        // candidates are goals, so fit the baseline vocabulary on them
        ScorerKind::Baseline if args.scorer.train.is_empty() => Box::new(TfIdfScorer::fit(goals.iter().copied(), args.lang)),
        _ => args.scorer.build(args.lang, g.seed, &goals)?,
    };
    let report = evaluate_open_domain(&instances, scorer.as_ref())?;
    log::info!(
        "MRR {:.4}, rank-1 accuracy {:.4} over {} instances ({} failures)",
        report.mrr,
        report.acc_at_1,
        report.instances,
        report.failures
    );
    write_document(&args.report, &run, &report)?;
    if let Some(p) = &args.holdout_out {
        write_records(p, &run, &holdout.pairs)?;
    }
    if let Some(p) = &args.instances_out {
        write_records(p, &run, &instances)?;
    }
    if report.failures > 0 {
        return Err(ProtocolFailure(format!("{} instances failed to score", report.failures)).into());
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long, default_value = "en")]
    pub lang: Language,
    /// MCQ file whose inputs fit the vocabulary before the first request.
    #[arg(long)]
    pub fit: Option<PathBuf>,
}

/// Serves the baseline scorer on stdin/stdout.
pub fn serve_baseline(args: &ServeArgs) -> Result<()> {
    let records = match &args.fit {
        Some(p) => read_records(p)?,
        None => Vec::new(),
    };
    let mut scorer = TfIdfScorer::fit(records.iter().map(|r| r.context.as_str()), args.lang);
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let stats = serve(&mut scorer, stdin.lock(), &mut out)?;
    log::info!(
        "served {} lines ({} errors, {} training phases)",
        stats.requests,
        stats.errors,
        stats.trained_phases
    );
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckTranscriptArgs {
    pub transcript: PathBuf,
}

pub fn check_transcript(args: &CheckTranscriptArgs) -> Result<()> {
    let report = validate_transcript(open(&args.transcript)?)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !report.is_conformant() {
        return Err(ProtocolFailure(format!("{} protocol violations", report.violations.len())).into());
    }
    Ok(())
}
