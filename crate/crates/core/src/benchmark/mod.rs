//! Intent-detection benchmarks cast as multiple-choice questions.
//!
//! Every utterance becomes one question whose candidates are the dataset's
//! intent names. Snips and the Facebook datasets offer their full intent
//! inventory (7 and 12 candidates); an SGD turn offers only the intents of
//! the service it is talking to (1 to 4).
//!
//! Split conventions follow the published setups: Snips has no test split,
//! so its 700-utterance validation split is what gets evaluated.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Language;
use crate::seed::rng_for;

mod fb;
mod sgd;
mod snips;

pub use fb::{fb_intent_name, FB_INTENTS};
pub use sgd::{humanize_intent, SGD_CONTEXT_UTTERANCES};
pub use snips::{snips_intent_name, SNIPS_INTENTS};

/// Default training-set sizes for learning curves.
pub const DEFAULT_CURVE_SIZES: [usize; 5] = [10, 50, 100, 500, 1000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Snips,
    Sgd,
    FbEn,
    FbEs,
    FbTh,
}

impl Dataset {
    pub const ALL: [Dataset; 5] = [Dataset::Snips, Dataset::Sgd, Dataset::FbEn, Dataset::FbEs, Dataset::FbTh];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Snips => "snips",
            Dataset::Sgd => "sgd",
            Dataset::FbEn => "fb_en",
            Dataset::FbEs => "fb_es",
            Dataset::FbTh => "fb_th",
        }
    }

    pub fn language(self) -> Language {
        match self {
            Dataset::Snips | Dataset::Sgd | Dataset::FbEn => Language::En,
            Dataset::FbEs => Language::Es,
            Dataset::FbTh => Language::Th,
        }
    }

    /// The split that is scored.
    pub fn evaluation_split(self) -> Split {
        match self {
            Dataset::Snips => Split::Validation,
            _ => Split::Test,
        }
    }

    /// Accuracy of uniform guessing as usually quoted for the dataset.
    pub fn chance_rate(self) -> f64 {
        match self {
            Dataset::Snips => 1.0 / 7.0,
            Dataset::Sgd => 0.25,
            Dataset::FbEn | Dataset::FbEs | Dataset::FbTh => 1.0 / 12.0,
        }
    }

    /// Split sizes and intent counts of the published releases.
    pub fn reference_stats(self) -> DatasetStats {
        let (train_size, valid_size, test_size, num_intents) = match self {
            Dataset::Snips => (2_100, 700, 0, 7),
            Dataset::Sgd => (163_197, 24_320, 42_922, 4),
            Dataset::FbEn => (30_521, 4_181, 8_621, 12),
            Dataset::FbEs => (3_617, 1_983, 3_043, 12),
            Dataset::FbTh => (2_156, 1_235, 1_692, 12),
        };
        DatasetStats {
            train_size,
            valid_size,
            test_size,
            num_intents,
        }
    }

    /// Files `load_benchmark` expects under `root`.
    pub fn manifest(self, root: &Path) -> Vec<PathBuf> {
        match self {
            Dataset::Snips => snips::manifest(root),
            Dataset::Sgd => sgd::manifest(root),
            _ => fb::manifest(self, root),
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Dataset::ALL
            .into_iter()
            .find(|d| d.name() == norm)
            .ok_or_else(|| format!("unknown dataset `{s}` (expected one of snips, sgd, fb_en, fb_es, fb_th)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("{dataset}: missing files under {root}; expected:\n{}", list_paths(.expected))]
    MissingFiles {
        dataset: Dataset,
        root: PathBuf,
        expected: Vec<PathBuf>,
    },
    #[error("{dataset}: {file}: label `{label}` is not a known intent")]
    UnknownLabel {
        dataset: Dataset,
        file: PathBuf,
        label: String,
    },
    #[error("{file}: {message}")]
    Format { file: PathBuf, message: String },
    #[error("{file}: {source}")]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("requested {requested} training examples but the split has {available}")]
    SubsampleTooLarge { requested: usize, available: usize },
}

fn list_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| format!("  {}", p.display()))
        .collect::<Vec<_>>()
        .join("\n")
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, BenchmarkError> {
    std::fs::read(path).map_err(|source| BenchmarkError::Io {
        file: path.to_path_buf(),
        source,
    })
}

pub(crate) fn require_files(dataset: Dataset, root: &Path, files: &[PathBuf]) -> Result<(), BenchmarkError> {
    if files.iter().all(|f| f.is_file()) {
        Ok(())
    } else {
        Err(BenchmarkError::MissingFiles {
            dataset,
            root: root.to_path_buf(),
            expected: files.to_vec(),
        })
    }
}

/// One benchmark utterance as a multiple-choice question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentInstance {
    pub id: String,
    pub dataset: Dataset,
    pub split: Split,
    pub context: String,
    pub candidates: Vec<String>,
    pub gold_index: usize,
}

impl IntentInstance {
    pub fn gold(&self) -> &str {
        &self.candidates[self.gold_index]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub train_size: usize,
    pub valid_size: usize,
    pub test_size: usize,
    /// Largest candidate set offered by any instance.
    pub num_intents: usize,
}

impl DatasetStats {
    pub fn from_instances(instances: &[IntentInstance]) -> Self {
        let mut stats = DatasetStats::default();
        for i in instances {
            match i.split {
                Split::Train => stats.train_size += 1,
                Split::Validation => stats.valid_size += 1,
                Split::Test => stats.test_size += 1,
            }
            stats.num_intents = stats.num_intents.max(i.candidates.len());
        }
        stats
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub dataset: Dataset,
    pub instances: Vec<IntentInstance>,
    pub stats: DatasetStats,
}

impl Benchmark {
    pub fn from_instances(dataset: Dataset, instances: Vec<IntentInstance>) -> Self {
        let stats = DatasetStats::from_instances(&instances);
        Self {
            dataset,
            instances,
            stats,
        }
    }

    pub fn split(&self, split: Split) -> Vec<IntentInstance> {
        self.instances.iter().filter(|i| i.split == split).cloned().collect()
    }

    pub fn evaluation_instances(&self) -> Vec<IntentInstance> {
        self.split(self.dataset.evaluation_split())
    }

    /// Fraction of evaluation instances with a single candidate (SGD only).
    pub fn single_candidate_fraction(&self) -> f64 {
        let eval = self.evaluation_instances();
        if eval.is_empty() {
            return 0.0;
        }
        eval.iter().filter(|i| i.candidates.len() == 1).count() as f64 / eval.len() as f64
    }

    /// Expected accuracy of uniform guessing over the evaluation split,
    /// i.e. the mean of 1/|candidates|.
    pub fn expected_chance(&self) -> f64 {
        let eval = self.evaluation_instances();
        if eval.is_empty() {
            return 0.0;
        }
        eval.iter().map(|i| 1.0 / i.candidates.len() as f64).sum::<f64>() / eval.len() as f64
    }
}

/// Loads every split of `dataset` from its published files under `root`.
pub fn load_benchmark(dataset: Dataset, root: &Path) -> Result<Benchmark, BenchmarkError> {
    let instances = match dataset {
        Dataset::Snips => snips::load(root)?,
        Dataset::Sgd => sgd::load(root)?,
        _ => fb::load(dataset, root)?,
    };
    Ok(Benchmark::from_instances(dataset, instances))
}

/// Uniform sample of `size` training instances without replacement.
///
/// The draw depends only on `(seed, size)` and the input order. Results are
/// returned in input order. Samples of different sizes are not nested.
pub fn subsample_training(
    instances: &[IntentInstance],
    size: usize,
    seed: u64,
) -> Result<Vec<IntentInstance>, BenchmarkError> {
    if size > instances.len() {
        return Err(BenchmarkError::SubsampleTooLarge {
            requested: size,
            available: instances.len(),
        });
    }
    let mut rng = rng_for(seed, "subsample", &(size as u64).to_le_bytes());
    let mut picked = index::sample(&mut rng, instances.len(), size).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| instances[i].clone()).collect())
}

/// Builds the candidate list for a fixed inventory and finds the gold index.
pub(crate) fn inventory_instance(
    id: String,
    dataset: Dataset,
    split: Split,
    context: String,
    inventory: &[&str],
    gold: &str,
) -> Option<IntentInstance> {
    let gold_index = inventory.iter().position(|c| *c == gold)?;
    Some(IntentInstance {
        id,
        dataset,
        split,
        context,
        candidates: inventory.iter().map(|s| s.to_string()).collect(),
        gold_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_split(n: usize) -> Vec<IntentInstance> {
        (0..n)
            .map(|i| IntentInstance {
                id: format!("x{i}"),
                dataset: Dataset::FbTh,
                split: Split::Train,
                context: format!("utterance {i}"),
                candidates: vec!["A".into(), "B".into()],
                gold_index: i % 2,
            })
            .collect()
    }

    #[test]
    fn subsample_sizes_and_determinism() {
        let split = fake_split(2156);
        assert!(subsample_training(&split, 0, 1).unwrap().is_empty());
        let a = subsample_training(&split, 100, 1).unwrap();
        let b = subsample_training(&split, 100, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        let ids: std::collections::HashSet<_> = a.iter().map(|i| &i.id).collect();
        assert_eq!(ids.len(), 100);
        assert_ne!(a, subsample_training(&split, 100, 2).unwrap());
        assert!(matches!(
            subsample_training(&split, 2157, 1),
            Err(BenchmarkError::SubsampleTooLarge { requested: 2157, available: 2156 })
        ));
    }

    #[test]
    fn reference_table() {
        assert_eq!(
            Dataset::FbTh.reference_stats(),
            DatasetStats {
                train_size: 2156,
                valid_size: 1235,
                test_size: 1692,
                num_intents: 12
            }
        );
        assert_eq!(Dataset::Snips.reference_stats().test_size, 0);
        assert_eq!(DEFAULT_CURVE_SIZES, [10, 50, 100, 500, 1000]);
    }

    #[test]
    fn dataset_names_parse() {
        for d in Dataset::ALL {
            assert_eq!(d.name().parse::<Dataset>().unwrap(), d);
        }
        assert_eq!("FB-en".parse::<Dataset>().unwrap(), Dataset::FbEn);
        assert_eq!(serde_json::to_string(&Dataset::FbEn).unwrap(), "\"fb_en\"");
    }

    #[test]
    fn missing_files_lists_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_benchmark(Dataset::FbEs, dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("train-es.tsv"), "{msg}");
        assert!(msg.contains("test-es.tsv"), "{msg}");
    }
}
