use std::collections::HashMap;

use crate::lang::{tokenize, Language};

use super::{CandidateScores, ScoreRequest, Scorer, ScorerError, TrainPhase};

/// Sparse vector with entries sorted by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    entries: Vec<(u32, f64)>,
}

impl SparseVec {
    /// Builds from unsorted `(index, value)` pairs; duplicate indices add up
    /// and zeros are dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        Self { entries }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().enumerate().map(|(i, &v)| (i as u32, v)).collect())
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot(&self, other: &SparseVec) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn normalized(&self) -> SparseVec {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        SparseVec {
            entries: self.entries.iter().map(|&(i, v)| (i, v / n)).collect(),
        }
    }

    /// Cosine similarity; 0 if either side is the zero vector.
    pub fn cosine(&self, other: &SparseVec) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.dot(other) / denom
        }
    }
}

/// TF-IDF vectorizer with a fitted vocabulary.
///
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`. Tokens outside the fitted
/// vocabulary carry no weight.
#[derive(Debug, Clone)]
pub struct TfIdf {
    language: Language,
    vocab: HashMap<String, u32>,
    idf: Vec<f64>,
    documents: usize,
}

impl TfIdf {
    pub fn fit<'a>(documents: impl IntoIterator<Item = &'a str>, language: Language) -> Self {
        let mut vocab: HashMap<String, u32> = HashMap::new();
        let mut df: Vec<usize> = Vec::new();
        let mut n = 0;
        for doc in documents {
            n += 1;
            let mut toks = tokenize(doc, language);
            toks.sort_unstable();
            toks.dedup();
            for t in toks {
                let next = vocab.len() as u32;
                let idx = *vocab.entry(t).or_insert(next);
                if idx as usize == df.len() {
                    df.push(0);
                }
                df[idx as usize] += 1;
            }
        }
        let idf = df
            .iter()
            .map(|&d| ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0)
            .collect();
        Self {
            language,
            vocab,
            idf,
            documents: n,
        }
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn documents(&self) -> usize {
        self.documents
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.vocab.get(token).map(|&i| self.idf[i as usize])
    }

    /// Raw term counts times idf.
    pub fn vectorize(&self, text: &str) -> SparseVec {
        let pairs = tokenize(text, self.language)
            .into_iter()
            .filter_map(|t| self.vocab.get(&t).map(|&i| (i, self.idf[i as usize])))
            .collect();
        SparseVec::from_pairs(pairs)
    }
}

/// Cosine similarity between TF-IDF vectors of the context and each candidate.
#[derive(Debug, Clone)]
pub struct TfIdfScorer {
    model: TfIdf,
}

impl TfIdfScorer {
    /// Fits the vocabulary and idf table on `contexts`.
    pub fn fit<'a>(contexts: impl IntoIterator<Item = &'a str>, language: Language) -> Self {
        Self {
            model: TfIdf::fit(contexts, language),
        }
    }

    pub fn model(&self) -> &TfIdf {
        &self.model
    }
}

impl Scorer for TfIdfScorer {
    fn name(&self) -> String {
        "tfidf-baseline".into()
    }

    fn score(&self, request: &ScoreRequest) -> Result<CandidateScores, ScorerError> {
        let ctx = self.model.vectorize(&request.context);
        let scores = request
            .candidates
            .iter()
            .map(|c| ctx.cosine(&self.model.vectorize(c)))
            .collect();
        Ok(CandidateScores {
            id: request.id.clone(),
            scores,
        })
    }

    /// Refits the idf table on the phase's contexts.
    fn train(&mut self, phase: &TrainPhase) -> Result<(), ScorerError> {
        let lang = self.model.language;
        self.model = TfIdf::fit(phase.records.iter().map(|r| r.context.as_str()), lang);
        Ok(())
    }
}
