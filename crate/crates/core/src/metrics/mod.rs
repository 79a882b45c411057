//! Accuracy, evaluation reports, the one-sided t-test over repeated runs and
//! few-shot learning curves.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{BenchmarkError, Dataset};
use crate::mcq::McqRecord;
use crate::parallel::map_collect;
use crate::scorer::{predict_from, ScoreRequest, Scorer, ScorerError};

mod curve;
mod significance;
pub mod student_t;

pub use curve::{build_learning_curve, validate_sizes, CurvePoint, LearningCurve, ScorerFactory};
pub use significance::{t_test_one_sample_one_tailed, SignificanceResult, DEFAULT_ALPHA};

/// Requests sent to a scorer in one batch.
pub const EVAL_BATCH: usize = 256;

/// Failure messages kept verbatim in a report.
const FAILURE_SAMPLES: usize = 5;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("accuracy of an empty prediction list is undefined")]
    EmptyPredictions,
    #[error("the t-test needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {index} is not a finite number")]
    NonFiniteSample { index: usize },
    #[error("invalid learning-curve sizes: {0}")]
    InvalidSizes(String),
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
}

/// Training regime a score was obtained under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    /// In-domain training data only.
    #[serde(rename = "ID")]
    Id,
    /// Same-language wikiHow pretraining, then in-domain data.
    #[serde(rename = "WH_ID")]
    WhId,
    /// Same-language wikiHow pretraining, no in-domain data.
    #[serde(rename = "WH_0shot")]
    WhZeroShot,
    /// English wikiHow pretraining, then in-domain data.
    #[serde(rename = "enWH_ID")]
    EnWhId,
    /// English wikiHow pretraining, no in-domain data.
    #[serde(rename = "enWH_0shot")]
    EnWhZeroShot,
}

impl Setting {
    pub const ALL: [Setting; 5] = [
        Setting::Id,
        Setting::WhId,
        Setting::WhZeroShot,
        Setting::EnWhId,
        Setting::EnWhZeroShot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Setting::Id => "ID",
            Setting::WhId => "WH_ID",
            Setting::WhZeroShot => "WH_0shot",
            Setting::EnWhId => "enWH_ID",
            Setting::EnWhZeroShot => "enWH_0shot",
        }
    }

    pub fn uses_wikihow(self) -> bool {
        self != Setting::Id
    }

    pub fn uses_in_domain(self) -> bool {
        matches!(self, Setting::Id | Setting::WhId | Setting::EnWhId)
    }

    /// Pretrains on English wikiHow regardless of the target language.
    pub fn english_wikihow(self) -> bool {
        matches!(self, Setting::EnWhId | Setting::EnWhZeroShot)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "id" => Ok(Setting::Id),
            "whid" => Ok(Setting::WhId),
            "wh0shot" | "whzeroshot" => Ok(Setting::WhZeroShot),
            "enwhid" => Ok(Setting::EnWhId),
            "enwh0shot" | "enwhzeroshot" => Ok(Setting::EnWhZeroShot),
            _ => Err(format!(
                "unknown setting `{s}` (expected ID, WH_ID, WH_0shot, enWH_ID or enWH_0shot)"
            )),
        }
    }
}

/// A predicted index (None when the scorer failed) and the gold index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub predicted: Option<usize>,
    pub gold: usize,
}

impl Prediction {
    pub fn new(predicted: usize, gold: usize) -> Self {
        Self {
            predicted: Some(predicted),
            gold,
        }
    }

    pub fn is_correct(&self) -> bool {
        self.predicted == Some(self.gold)
    }
}

/// Fraction of predictions equal to gold. Failed predictions count as wrong.
pub fn accuracy(predictions: &[Prediction]) -> Result<f64, MetricsError> {
    if predictions.is_empty() {
        return Err(MetricsError::EmptyPredictions);
    }
    let correct = predictions.iter().filter(|p| p.is_correct()).count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// Three-decimal display with the leading zero dropped: `0.9941` → `.994`.
pub fn format_accuracy(x: f64) -> String {
    let s = format!("{x:.3}");
    match s.strip_prefix('0') {
        Some(rest) => rest.to_string(),
        None => s,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentAccuracy {
    pub instances: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: Option<Dataset>,
    pub setting: Setting,
    pub scorer: String,
    pub n_instances: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Keyed by the gold candidate text.
    pub per_intent_accuracy: BTreeMap<String, IntentAccuracy>,
    /// Instances whose score request failed; they count as wrong.
    pub failures: usize,
    #[serde(default)]
    pub failure_samples: Vec<String>,
    /// Instances with one candidate, predicted without asking the scorer.
    pub single_candidate: usize,
}

impl EvalReport {
    /// One table row: dataset, setting, scorer, accuracy.
    pub fn table_row(&self) -> String {
        format!(
            "{:<8} {:<11} {:<16} {}",
            self.dataset.map(|d| d.name()).unwrap_or("-"),
            self.setting.name(),
            self.scorer,
            format_accuracy(self.accuracy)
        )
    }
}

/// Plain-text table of accuracies, one row per report.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut out = format!("{:<8} {:<11} {:<16} {}\n", "Dataset", "Setting", "Scorer", "Acc");
    for r in reports {
        out.push_str(&r.table_row());
        out.push('\n');
    }
    out
}

/// Outcome of one multiple-choice record.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub prediction: Prediction,
    pub error: Option<String>,
}

/// Predicts every record. Single-candidate records are answered with index 0
/// without a scorer call. Batches are scored in parallel; failures are
/// recorded per record.
pub fn predict_records(records: &[McqRecord], scorer: &dyn Scorer) -> Vec<Outcome> {
    let chunks: Vec<&[McqRecord]> = records.chunks(EVAL_BATCH).collect();
    let per_chunk = map_collect(&chunks, |chunk| {
        let requests: Vec<(usize, ScoreRequest)> = chunk
            .iter()
            .enumerate()
            .filter(|(_, r)| r.candidates.len() > 1)
            .map(|(i, r)| (i, ScoreRequest::from(r)))
            .collect();
        let mut out: Vec<Outcome> = chunk
            .iter()
            .map(|r| Outcome {
                prediction: Prediction::new(0, r.label),
                error: None,
            })
            .collect();
        let mut valid = Vec::with_capacity(requests.len());
        for (i, req) in requests {
            match req.validate() {
                Ok(()) => valid.push((i, req)),
                Err(e) => {
                    out[i].prediction.predicted = None;
                    out[i].error = Some(e.to_string());
                }
            }
        }
        let batch: Vec<ScoreRequest> = valid.iter().map(|(_, r)| r.clone()).collect();
        let results = scorer.score_batch(&batch);
        for ((i, req), res) in valid.iter().zip(results) {
            match res.and_then(|s| predict_from(req, &s)) {
                Ok(p) => out[*i].prediction.predicted = Some(p),
                Err(e) => {
                    out[*i].prediction.predicted = None;
                    out[*i].error = Some(e.to_string());
                }
            }
        }
        out
    });
    per_chunk.into_iter().flatten().collect()
}

/// Scores `records` and aggregates an [`EvalReport`].
pub fn evaluate(
    records: &[McqRecord],
    scorer: &dyn Scorer,
    dataset: Option<Dataset>,
    setting: Setting,
) -> Result<EvalReport, MetricsError> {
    let outcomes = predict_records(records, scorer);
    report_from_outcomes(records, &outcomes, scorer.name(), dataset, setting)
}

pub fn report_from_outcomes(
    records: &[McqRecord],
    outcomes: &[Outcome],
    scorer: String,
    dataset: Option<Dataset>,
    setting: Setting,
) -> Result<EvalReport, MetricsError> {
    assert_eq!(records.len(), outcomes.len(), "one outcome per record");
    let predictions: Vec<Prediction> = outcomes.iter().map(|o| o.prediction).collect();
    let acc = accuracy(&predictions)?;
    let mut per_intent: BTreeMap<String, IntentAccuracy> = BTreeMap::new();
    for (r, p) in records.iter().zip(&predictions) {
        let e = per_intent.entry(r.gold().to_string()).or_insert(IntentAccuracy {
            instances: 0,
            correct: 0,
            accuracy: 0.0,
        });
        e.instances += 1;
        e.correct += usize::from(p.is_correct());
    }
    for e in per_intent.values_mut() {
        e.accuracy = e.correct as f64 / e.instances as f64;
    }
    let errors: Vec<&String> = outcomes.iter().filter_map(|o| o.error.as_ref()).collect();
    Ok(EvalReport {
        dataset,
        setting,
        scorer,
        n_instances: records.len(),
        correct: predictions.iter().filter(|p| p.is_correct()).count(),
        accuracy: acc,
        per_intent_accuracy: per_intent,
        failures: errors.len(),
        failure_samples: errors.iter().take(FAILURE_SAMPLES).map(|s| s.to_string()).collect(),
        single_candidate: records.iter().filter(|r| r.candidates.len() == 1).count(),
    })
}
