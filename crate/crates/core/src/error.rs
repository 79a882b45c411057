//! Crate-wide error type wrapping each module's own error.

use thiserror::Error;

use crate::benchmark::BenchmarkError;
use crate::corpus::CorpusError;
use crate::mcq::McqError;
use crate::metrics::MetricsError;
use crate::open_domain::OpenDomainError;
use crate::pretrain::BuildError;
use crate::scorer::ScorerError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Mcq(#[from] McqError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    OpenDomain(#[from] OpenDomainError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the failure came from a scorer breaking the wire protocol.
    pub fn is_protocol(&self) -> bool {
        match self {
            Error::Scorer(e) => e.is_protocol(),
            Error::Metrics(MetricsError::Scorer(e)) => e.is_protocol(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
