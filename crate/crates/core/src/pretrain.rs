//! 4-choose-1 goal/step examples.
//!
//! Each article with at least one step yields exactly one example: its
//! longest step, its own goal, and three negative goals. Negatives come from
//! a greedy walk over the related-article graph: starting at the source
//! article, move to the related article whose goal shares the fewest tokens
//! (Jaccard) with the current article's goal, take its goal as a negative,
//! and continue from there. When the walk runs out of usable neighbours the
//! remaining negatives are drawn uniformly from the corpus, skipping goals
//! that overlap the positive goal by `fallback_threshold` or more.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Article, Corpus};
use crate::lang::{jaccard, token_set, Language};
use crate::parallel;
use crate::seed::rng_for;

pub const NUM_CANDIDATES: usize = 4;
pub const NUM_NEGATIVES: usize = NUM_CANDIDATES - 1;
pub const DEFAULT_FALLBACK_THRESHOLD: f64 = 0.5;

/// Draws per missing negative before the fallback switches from rejection
/// sampling to a full scan of the corpus.
const REJECTION_ATTEMPTS_PER_DRAW: usize = 64;

/// Example counts of the reference full-site dumps, per language.
pub fn reference_example_count(language: Language) -> usize {
    match language {
        Language::En => 107_298,
        Language::Es => 64_803,
        Language::Th => 6_342,
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("corpus has {distinct} distinct goals; at least {NUM_CANDIDATES} are needed")]
    TooFewGoals { distinct: usize },
    #[error("article `{0}` is not in the corpus")]
    UnknownSource(String),
    #[error("article `{source_id}`: only {found} eligible negative goals in the whole corpus")]
    InsufficientCandidates { source_id: String, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalStepExample {
    pub id: String,
    pub language: Language,
    #[serde(rename = "step")]
    pub step_text: String,
    pub candidates: Vec<String>,
    #[serde(rename = "label")]
    pub answer_index: usize,
}

impl GoalStepExample {
    pub fn gold(&self) -> &str {
        &self.candidates[self.answer_index]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingTrace {
    pub source_id: String,
    /// Pivots of the walk, starting with the source.
    pub visited_ids: Vec<String>,
    pub chosen_negative_ids: Vec<String>,
    /// Set when at least one negative came from the global fallback.
    pub exhausted: bool,
}

/// Jaccard similarity of the token sets of `a` and `b`.
pub fn lexical_overlap(a: &str, b: &str, language: Language) -> f64 {
    jaccard(&token_set(a, language), &token_set(b, language))
}

/// Longest step by character count; the earliest one wins ties.
pub fn select_positive_step(article: &Article) -> Option<&str> {
    let mut best: Option<(usize, &str)> = None;
    for step in &article.steps {
        let len = step.chars().count();
        if best.is_none_or(|(l, _)| len > l) {
            best = Some((len, step));
        }
    }
    best.map(|(_, s)| s)
}

/// Precomputed goal token sets for repeated negative sampling over one corpus.
pub struct NegativeSampler<'c> {
    corpus: &'c Corpus,
    tokens: Vec<BTreeSet<String>>,
    /// Corpus positions sorted by article id, so fallback draws do not depend
    /// on input order.
    by_id: Vec<usize>,
    seed: u64,
    fallback_threshold: f64,
}

impl<'c> NegativeSampler<'c> {
    pub fn new(corpus: &'c Corpus, seed: u64) -> Self {
        let lang = corpus.language;
        let tokens = parallel::map_collect(corpus.articles(), |a| token_set(&a.goal, lang));
        let mut by_id: Vec<usize> = (0..corpus.len()).collect();
        by_id.sort_by(|&a, &b| corpus.articles()[a].id.cmp(&corpus.articles()[b].id));
        Self {
            corpus,
            tokens,
            by_id,
            seed,
            fallback_threshold: DEFAULT_FALLBACK_THRESHOLD,
        }
    }

    pub fn with_fallback_threshold(mut self, threshold: f64) -> Self {
        self.fallback_threshold = threshold;
        self
    }

    /// Picks three negative goals for `source`.
    pub fn sample(&self, source: &Article) -> Result<(Vec<String>, SamplingTrace), BuildError> {
        let articles = self.corpus.articles();
        let source_pos = self
            .corpus
            .position(&source.id)
            .ok_or_else(|| BuildError::UnknownSource(source.id.clone()))?;
        let positive = &articles[source_pos].goal;

        let mut chosen: Vec<usize> = Vec::with_capacity(NUM_NEGATIVES);
        let mut visited = vec![source.id.clone()];
        let usable = |pos: usize, chosen: &[usize]| {
            pos != source_pos
                && !chosen.contains(&pos)
                && articles[pos].goal != *positive
                && chosen.iter().all(|&c| articles[c].goal != articles[pos].goal)
        };

        let mut current = source_pos;
        while chosen.len() < NUM_NEGATIVES {
            let mut best: Option<(f64, usize)> = None;
            for rid in &articles[current].related_ids {
                let Some(pos) = self.corpus.position(rid) else { continue };
                if !usable(pos, &chosen) {
                    continue;
                }
                let overlap = jaccard(&self.tokens[current], &self.tokens[pos]);
                let better = match best {
                    None => true,
                    Some((bo, bp)) => overlap < bo || (overlap == bo && articles[pos].id < articles[bp].id),
                };
                if better {
                    best = Some((overlap, pos));
                }
            }
            let Some((_, next)) = best else { break };
            chosen.push(next);
            visited.push(articles[next].id.clone());
            current = next;
        }

        let exhausted = chosen.len() < NUM_NEGATIVES;
        if exhausted {
            self.fill_from_corpus(source_pos, &mut chosen, &usable)?;
        }

        let goals = chosen.iter().map(|&p| articles[p].goal.clone()).collect();
        let trace = SamplingTrace {
            source_id: source.id.clone(),
            visited_ids: visited,
            chosen_negative_ids: chosen.iter().map(|&p| articles[p].id.clone()).collect(),
            exhausted,
        };
        Ok((goals, trace))
    }

    fn fill_from_corpus(
        &self,
        source_pos: usize,
        chosen: &mut Vec<usize>,
        usable: &dyn Fn(usize, &[usize]) -> bool,
    ) -> Result<(), BuildError> {
        let articles = self.corpus.articles();
        let eligible = |pos: usize, chosen: &[usize]| {
            usable(pos, chosen) && jaccard(&self.tokens[source_pos], &self.tokens[pos]) < self.fallback_threshold
        };
        let mut rng = rng_for(self.seed, "fallback", articles[source_pos].id.as_bytes());
        let n = self.by_id.len();
        let mut attempts = REJECTION_ATTEMPTS_PER_DRAW * (NUM_NEGATIVES - chosen.len());
        while chosen.len() < NUM_NEGATIVES && attempts > 0 {
            attempts -= 1;
            let pos = self.by_id[rng.random_range(0..n)];
            if eligible(pos, chosen) {
                chosen.push(pos);
            }
        }
        if chosen.len() < NUM_NEGATIVES {
            let mut pool: Vec<usize> = self.by_id.iter().copied().filter(|&p| eligible(p, chosen)).collect();
            pool.shuffle(&mut rng);
            for pos in pool {
                if chosen.len() == NUM_NEGATIVES {
                    break;
                }
                if eligible(pos, chosen) {
                    chosen.push(pos);
                }
            }
        }
        if chosen.len() < NUM_NEGATIVES {
            return Err(BuildError::InsufficientCandidates {
                source_id: articles[source_pos].id.clone(),
                found: chosen.len(),
            });
        }
        Ok(())
    }
}

/// Convenience wrapper over [`NegativeSampler`] for a single source.
pub fn sample_negatives(
    source: &Article,
    corpus: &Corpus,
    seed: u64,
) -> Result<(Vec<String>, SamplingTrace), BuildError> {
    NegativeSampler::new(corpus, seed).sample(source)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub seed: u64,
    pub fallback_threshold: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            seed: crate::seed::DEFAULT_SEED,
            fallback_threshold: DEFAULT_FALLBACK_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub language: Language,
    pub seed: u64,
    pub fallback_threshold: f64,
    pub articles: usize,
    pub examples: usize,
    pub skipped_no_steps: usize,
    pub skipped_ids: Vec<String>,
    pub exhausted_fallbacks: usize,
    pub exhausted_rate: f64,
    /// How often the gold goal landed at each candidate position.
    pub answer_positions: [usize; NUM_CANDIDATES],
    /// Example count of the reference dump for this language.
    pub reference_examples: usize,
    /// `examples - reference_examples`; informational only since the live
    /// site keeps changing.
    pub reference_deviation: i64,
}

#[derive(Debug, Clone)]
pub struct BuiltDataset {
    pub examples: Vec<GoalStepExample>,
    pub traces: Vec<SamplingTrace>,
    pub summary: BuildSummary,
}

enum Outcome {
    Example(GoalStepExample, SamplingTrace),
    NoSteps(String),
}

/// Builds one example per article with steps, sorted by article id.
pub fn build_dataset(corpus: &Corpus, options: &BuildOptions) -> Result<BuiltDataset, BuildError> {
    let distinct: HashSet<&str> = corpus.articles().iter().map(|a| a.goal.as_str()).collect();
    if distinct.len() < NUM_CANDIDATES {
        return Err(BuildError::TooFewGoals { distinct: distinct.len() });
    }

    let sampler = NegativeSampler::new(corpus, options.seed).with_fallback_threshold(options.fallback_threshold);
    let mut order: Vec<&Article> = corpus.articles().iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));

    let outcomes = parallel::map_collect(&order, |article| -> Result<Outcome, BuildError> {
        let Some(step) = select_positive_step(article) else {
            return Ok(Outcome::NoSteps(article.id.clone()));
        };
        let (negatives, trace) = sampler.sample(article)?;
        let mut candidates = Vec::with_capacity(NUM_CANDIDATES);
        candidates.push(article.goal.clone());
        candidates.extend(negatives);
        candidates.shuffle(&mut rng_for(options.seed, "shuffle", article.id.as_bytes()));
        let answer_index = candidates.iter().position(|c| *c == article.goal).unwrap_or(0);
        Ok(Outcome::Example(
            GoalStepExample {
                id: article.id.clone(),
                language: corpus.language,
                step_text: step.to_string(),
                candidates,
                answer_index,
            },
            trace,
        ))
    });

    let mut examples = Vec::new();
    let mut traces = Vec::new();
    let mut skipped_ids = Vec::new();
    for outcome in outcomes {
        match outcome? {
            Outcome::Example(e, t) => {
                examples.push(e);
                traces.push(t);
            }
            Outcome::NoSteps(id) => skipped_ids.push(id),
        }
    }

    let mut answer_positions = [0; NUM_CANDIDATES];
    for e in &examples {
        answer_positions[e.answer_index] += 1;
    }
    let exhausted_fallbacks = traces.iter().filter(|t| t.exhausted).count();
    let reference_examples = reference_example_count(corpus.language);
    let summary = BuildSummary {
        language: corpus.language,
        seed: options.seed,
        fallback_threshold: options.fallback_threshold,
        articles: corpus.len(),
        examples: examples.len(),
        skipped_no_steps: skipped_ids.len(),
        skipped_ids,
        exhausted_fallbacks,
        exhausted_rate: if examples.is_empty() {
            0.0
        } else {
            exhausted_fallbacks as f64 / examples.len() as f64
        },
        answer_positions,
        reference_examples,
        reference_deviation: examples.len() as i64 - reference_examples as i64,
    };
    Ok(BuiltDataset {
        examples,
        traces,
        summary,
    })
}
