use serde::{Deserialize, Serialize};

use crate::benchmark::{subsample_training, Benchmark, Dataset, Split};
use crate::mcq::McqRecord;
use crate::parallel::map_collect;
use crate::scorer::{Scorer, ScorerError, TrainPhase};
use crate::seed::derive_seed;

use super::{evaluate, MetricsError, Setting};

/// Builds a fresh scorer for one (size, repeat) cell. Any training that
/// precedes the in-domain data (e.g. a wikiHow phase) is the factory's job.
pub type ScorerFactory<'a> = dyn Fn() -> Result<Box<dyn Scorer>, ScorerError> + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub mean_accuracy: f64,
    pub accuracies: Vec<f64>,
    /// Scorer failures summed over repeats.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub dataset: Dataset,
    pub setting: Setting,
    pub scorer: String,
    pub seed: u64,
    pub repeats: usize,
    pub sizes: Vec<usize>,
    pub points: Vec<CurvePoint>,
}

/// Sizes must be non-empty, at least 1, strictly increasing and no larger
/// than the training split.
pub fn validate_sizes(sizes: &[usize], available: usize) -> Result<(), MetricsError> {
    if sizes.is_empty() {
        return Err(MetricsError::InvalidSizes("no sizes given".into()));
    }
    if sizes.contains(&0) {
        return Err(MetricsError::InvalidSizes("sizes must be at least 1".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MetricsError::InvalidSizes(format!("sizes must be strictly increasing: {sizes:?}")));
    }
    let largest = *sizes.last().expect("non-empty");
    if largest > available {
        return Err(MetricsError::InvalidSizes(format!(
            "size {largest} exceeds the {available} training instances"
        )));
    }
    Ok(())
}

/// Accuracy on the evaluation split after training on subsamples of the
/// training split, `repeats` times per size.
///
/// Each (size, repeat) cell draws its subsample with a seed derived from
/// `seed`, the size and the repeat index, so cells are independent of one
/// another and of scheduling.
pub fn build_learning_curve(
    benchmark: &Benchmark,
    setting: Setting,
    sizes: &[usize],
    repeats: usize,
    seed: u64,
    factory: &ScorerFactory<'_>,
) -> Result<LearningCurve, MetricsError> {
    let train = benchmark.split(Split::Train);
    validate_sizes(sizes, train.len())?;
    if repeats == 0 {
        return Err(MetricsError::NoRepeats);
    }
    let eval: Vec<McqRecord> = benchmark.evaluation_instances().iter().map(McqRecord::from).collect();
    let cells: Vec<(usize, usize)> = sizes.iter().flat_map(|&s| (0..repeats).map(move |r| (s, r))).collect();
    let results = map_collect(&cells, |&(size, repeat)| -> Result<(f64, usize, String), MetricsError> {
        let mut key = (size as u64).to_le_bytes().to_vec();
        key.extend((repeat as u64).to_le_bytes());
        let cell_seed = derive_seed(seed, "curve", &key);
        let sample = subsample_training(&train, size, cell_seed)?;
        let mut scorer = factory()?;
        scorer.train(&TrainPhase {
            name: format!("{}-train-{size}-r{repeat}", benchmark.dataset.name()),
            source: None,
            records: sample.iter().map(McqRecord::from).collect(),
        })?;
        let report = evaluate(&eval, scorer.as_ref(), Some(benchmark.dataset), setting)?;
        Ok((report.accuracy, report.failures, report.scorer))
    });
    let mut points: Vec<CurvePoint> = Vec::with_capacity(sizes.len());
    let mut scorer_name = String::new();
    for (&(size, _), res) in cells.iter().zip(results) {
        let (acc, failures, name) = res?;
        scorer_name = name;
        if points.last().is_none_or(|p| p.size != size) {
            points.push(CurvePoint {
                size,
                mean_accuracy: 0.0,
                accuracies: Vec::with_capacity(repeats),
                failures: 0,
            });
        }
        let p = points.last_mut().expect("pushed above");
        p.accuracies.push(acc);
        p.failures += failures;
    }
    for p in &mut points {
        p.mean_accuracy = p.accuracies.iter().sum::<f64>() / p.accuracies.len() as f64;
    }
    Ok(LearningCurve {
        dataset: benchmark.dataset,
        setting,
        scorer: scorer_name,
        seed,
        repeats,
        sizes: sizes.to_vec(),
        points,
    })
}
