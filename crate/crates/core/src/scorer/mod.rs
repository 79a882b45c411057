//! Scorers map a context and a candidate list to one real-valued likelihood
//! per candidate. Only the argmax and the induced ranking are used, so
//! scores need not be probabilities.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mcq::McqRecord;

mod external;
pub mod protocol;
mod random;
mod tfidf;

pub use external::{Connection, ExternalScorer, DEFAULT_TIMEOUT};
pub use random::RandomScorer;
pub use tfidf::{SparseVec, TfIdf, TfIdfScorer};

#[derive(Debug, Error)]
pub enum ScorerError {
    /// The scorer broke the wire contract: wrong shape, wrong id, timeout,
    /// non-finite scores. `line` holds the offending input when there is one.
    #[error("protocol error: {message}{}", .line.as_ref().map(|l| format!("\n  offending line: {l}")).unwrap_or_default())]
    Protocol { message: String, line: Option<String> },
    #[error("invalid score request `{id}`: {message}")]
    InvalidRequest { id: String, message: String },
    #[error("scorer I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("scorer `{scorer}` cannot train: {message}")]
    Training { scorer: String, message: String },
}

impl ScorerError {
    pub fn protocol(message: impl Into<String>, line: Option<&str>) -> Self {
        ScorerError::Protocol {
            message: message.into(),
            line: line.map(str::to_string),
        }
    }

    pub fn is_protocol(&self) -> bool {
        matches!(self, ScorerError::Protocol { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub id: String,
    pub context: String,
    pub candidates: Vec<String>,
}

impl ScoreRequest {
    pub fn new(id: impl Into<String>, context: impl Into<String>, candidates: Vec<String>) -> Self {
        Self {
            id: id.into(),
            context: context.into(),
            candidates,
        }
    }

    /// At least two candidates, none empty.
    pub fn validate(&self) -> Result<(), ScorerError> {
        let invalid = |message: &str| ScorerError::InvalidRequest {
            id: self.id.clone(),
            message: message.to_string(),
        };
        if self.candidates.len() < 2 {
            return Err(invalid("needs at least two candidates"));
        }
        if self.candidates.iter().any(String::is_empty) {
            return Err(invalid("empty candidate"));
        }
        Ok(())
    }
}

impl From<&McqRecord> for ScoreRequest {
    fn from(r: &McqRecord) -> Self {
        ScoreRequest::new(r.id.clone(), r.context.clone(), r.candidates.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScores {
    pub id: String,
    pub scores: Vec<f64>,
}

impl CandidateScores {
    /// Checks the response against its request: same id, one finite score
    /// per candidate.
    pub fn check(&self, request: &ScoreRequest) -> Result<(), ScorerError> {
        if self.id != request.id {
            return Err(ScorerError::protocol(
                format!("response id `{}` does not match request `{}`", self.id, request.id),
                None,
            ));
        }
        if self.scores.len() != request.candidates.len() {
            return Err(ScorerError::protocol(
                format!(
                    "request `{}` has {} candidates but {} scores came back",
                    request.id,
                    request.candidates.len(),
                    self.scores.len()
                ),
                None,
            ));
        }
        if let Some(i) = self.scores.iter().position(|s| !s.is_finite()) {
            return Err(ScorerError::protocol(
                format!("request `{}`: score {i} is not finite", request.id),
                None,
            ));
        }
        Ok(())
    }
}

/// Training data handed to a scorer before evaluation.
#[derive(Debug, Clone)]
pub struct TrainPhase {
    pub name: String,
    /// File the records came from, when there is one. External scorers are
    /// pointed at it directly instead of receiving a temporary copy.
    pub source: Option<PathBuf>,
    pub records: Vec<McqRecord>,
}

pub trait Scorer: Send + Sync {
    fn name(&self) -> String;

    fn score(&self, request: &ScoreRequest) -> Result<CandidateScores, ScorerError>;

    /// Scores several requests; one result per request, in order.
    fn score_batch(&self, requests: &[ScoreRequest]) -> Vec<Result<CandidateScores, ScorerError>> {
        requests.iter().map(|r| self.score(r)).collect()
    }

    /// Trains (or fits) on one phase of data. Phases are applied in order.
    fn train(&mut self, _phase: &TrainPhase) -> Result<(), ScorerError> {
        Ok(())
    }
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// Checks `scores` against `request` and returns the predicted index.
pub fn predict_from(request: &ScoreRequest, scores: &CandidateScores) -> Result<usize, ScorerError> {
    scores.check(request)?;
    Ok(argmax(&scores.scores).expect("validated requests have candidates"))
}

/// Scores `request` and returns the argmax index.
pub fn predict(request: &ScoreRequest, scorer: &dyn Scorer) -> Result<usize, ScorerError> {
    request.validate()?;
    let scores = scorer.score(request)?;
    predict_from(request, &scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Fixed(Vec<f64>);

    impl Scorer for Fixed {
        fn name(&self) -> String {
            "fixed".into()
        }

        fn score(&self, r: &ScoreRequest) -> Result<CandidateScores, ScorerError> {
            Ok(CandidateScores {
                id: r.id.clone(),
                scores: self.0.clone(),
            })
        }
    }

    fn req(n: usize) -> ScoreRequest {
        ScoreRequest::new("r", "ctx", (0..n).map(|i| format!("c{i}")).collect())
    }

    #[test]
    fn predict_examples() {
        assert_eq!(predict(&req(4), &Fixed(vec![0.1, 0.9, 0.3, 0.2])).unwrap(), 1);
        assert_eq!(predict(&req(2), &Fixed(vec![0.5, 0.5])).unwrap(), 0);
        let twelve: Vec<f64> = (0..12).map(|i| ((i * 7) % 12) as f64).collect();
        assert!(predict(&req(12), &Fixed(twelve)).unwrap() < 12);
    }

    #[test]
    fn predict_rejects_bad_responses() {
        assert!(predict(&req(2), &Fixed(vec![0.1, 0.2, 0.3])).unwrap_err().is_protocol());
        assert!(predict(&req(2), &Fixed(vec![f64::NAN, 0.2])).unwrap_err().is_protocol());
        assert!(predict(&req(2), &Fixed(vec![f64::INFINITY, 0.2])).unwrap_err().is_protocol());
        assert!(matches!(
            predict(&req(1), &Fixed(vec![1.0])),
            Err(ScorerError::InvalidRequest { .. })
        ));
    }

    proptest! {
        #[test]
        fn argmax_invariant_under_increasing_maps(scores in prop::collection::vec(-50.0f64..50.0, 2..16), a in 0.01f64..10.0, b in -5.0f64..5.0) {
            let base = argmax(&scores);
            let affine: Vec<f64> = scores.iter().map(|s| a * s + b).collect();
            let cubic: Vec<f64> = scores.iter().map(|s| s * s * s).collect();
            let exp: Vec<f64> = scores.iter().map(|s| (s / 10.0).exp()).collect();
            prop_assert_eq!(base, argmax(&affine));
            prop_assert_eq!(base, argmax(&cubic));
            prop_assert_eq!(base, argmax(&exp));
        }
    }
}
