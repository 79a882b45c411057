use rand::Rng;

use crate::seed::rng_for;

use super::{CandidateScores, ScoreRequest, Scorer, ScorerError};

/// Uniform random scores drawn from a stream keyed by `(seed, request id)`.
///
/// The argmax is uniform over candidates, so its accuracy estimates chance.
#[derive(Debug, Clone, Copy)]
pub struct RandomScorer {
    seed: u64,
}

impl RandomScorer {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Scorer for RandomScorer {
    fn name(&self) -> String {
        format!("random(seed={})", self.seed)
    }

    fn score(&self, request: &ScoreRequest) -> Result<CandidateScores, ScorerError> {
        let mut rng = rng_for(self.seed, "random-scorer", request.id.as_bytes());
        Ok(CandidateScores {
            id: request.id.clone(),
            scores: request.candidates.iter().map(|_| rng.random::<f64>()).collect(),
        })
    }
}
