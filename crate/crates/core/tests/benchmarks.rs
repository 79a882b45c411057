//! Benchmark loaders on mirrors of the published layouts, and learning
//! curves built on top of them.

mod common;

use std::fs;

use wikihow_intent::benchmark::{load_benchmark, subsample_training, BenchmarkError, Dataset, Split};
use wikihow_intent::mcq::McqRecord;
use wikihow_intent::metrics::{build_learning_curve, t_test_one_sample_one_tailed, Setting};
use wikihow_intent::parallel::with_workers;
use wikihow_intent::scorer::{RandomScorer, Scorer, ScorerError, TfIdfScorer};

#[test]
fn fb_mirror_loads_every_language() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fb_mirror(dir.path(), 1);
    for (d, (_, train, valid, test)) in [Dataset::FbEn, Dataset::FbEs, Dataset::FbTh].into_iter().zip(common::FB_SIZES) {
        let b = load_benchmark(d, dir.path()).unwrap();
        assert_eq!((b.stats.train_size, b.stats.valid_size, b.stats.test_size), (train, valid, test));
        assert_eq!(b.stats.num_intents, 12);
        for i in &b.instances {
            assert_eq!(i.candidates.len(), 12);
            assert!(i.gold_index < 12);
        }
        assert!((b.expected_chance() - 1.0 / 12.0).abs() < 1e-12);
    }
}

#[test]
fn snips_mirror_evaluates_on_validation() {
    let dir = tempfile::tempdir().unwrap();
    common::write_snips_mirror(dir.path(), 2);
    let b = load_benchmark(Dataset::Snips, dir.path()).unwrap();
    assert_eq!(b.evaluation_instances().len(), 700);
    assert!(b.evaluation_instances().iter().all(|i| i.split == Split::Validation));
    let record = McqRecord::from(&b.instances[0]);
    assert!(record.validate().is_ok());
}

#[test]
fn missing_files_are_named() {
    let dir = tempfile::tempdir().unwrap();
    match load_benchmark(Dataset::FbEs, dir.path()) {
        Err(BenchmarkError::MissingFiles { expected, .. }) => {
            assert!(expected.iter().any(|p| p.ends_with("es/train-es.tsv")), "{expected:?}");
        }
        other => panic!("expected MissingFiles, got {other:?}"),
    }
    fs::create_dir_all(dir.path().join("es")).unwrap();
    fs::write(dir.path().join("es/train-es.tsv"), "no tabs here\n").unwrap();
    fs::write(dir.path().join("es/eval-es.tsv"), "").unwrap();
    fs::write(dir.path().join("es/test-es.tsv"), "").unwrap();
    assert!(load_benchmark(Dataset::FbEs, dir.path()).is_err());
}

#[test]
fn subsamples_are_seeded_and_in_order() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fb_mirror(dir.path(), 3);
    let b = load_benchmark(Dataset::FbTh, dir.path()).unwrap();
    let train = b.split(Split::Train);
    let a = subsample_training(&train, 100, 9).unwrap();
    assert_eq!(a, subsample_training(&train, 100, 9).unwrap());
    assert_ne!(a, subsample_training(&train, 100, 10).unwrap());
    let positions: Vec<usize> = a.iter().map(|x| train.iter().position(|t| t.id == x.id).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    assert!(subsample_training(&train, train.len() + 1, 9).is_err());
}

#[test]
fn curves_are_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fb_mirror(dir.path(), 4);
    let b = load_benchmark(Dataset::FbTh, dir.path()).unwrap();
    let factory = || -> Result<Box<dyn Scorer>, ScorerError> { Ok(Box::new(RandomScorer::new(5))) };
    let one = with_workers(Some(1), || build_learning_curve(&b, Setting::Id, &[10, 100], 3, 13, &factory)).unwrap();
    let many = with_workers(Some(6), || build_learning_curve(&b, Setting::Id, &[10, 100], 3, 13, &factory)).unwrap();
    assert_eq!(one.points.len(), 2);
    for (p, q) in one.points.iter().zip(&many.points) {
        assert_eq!(p.accuracies, q.accuracies);
        assert_eq!(p.accuracies.len(), 3);
    }
}

#[test]
fn baseline_curve_feeds_the_significance_test() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fb_mirror(dir.path(), 5);
    let b = load_benchmark(Dataset::FbEs, dir.path()).unwrap();
    let lang = Dataset::FbEs.language();
    let factory = move || -> Result<Box<dyn Scorer>, ScorerError> { Ok(Box::new(TfIdfScorer::fit(std::iter::empty(), lang))) };
    let curve = build_learning_curve(&b, Setting::Id, &[500], 5, 13, &factory).unwrap();
    let accs = &curve.points[0].accuracies;
    assert_eq!(accs.len(), 5);
    let t = t_test_one_sample_one_tailed(accs, Dataset::FbEs.chance_rate()).unwrap();
    assert!(t.significant, "{t:?}");
    assert_eq!(t.degrees_of_freedom, 4);
}
