//! The multiple-choice JSON-Lines format consumed by the evaluator.
//!
//! Pretraining examples and cast benchmark instances share one shape: an
//! input text, an ordered candidate list and the index of the gold
//! candidate. Pretraining files name the input `step`, benchmark files name
//! it `context`; both are accepted on read.

use std::collections::HashSet;
use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{Dataset, IntentInstance, Split};
use crate::lang::Language;
use crate::pretrain::GoalStepExample;

#[derive(Debug, Error)]
pub enum McqError {
    #[error("failed to read multiple-choice file: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<Dataset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<Language>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(alias = "step")]
    pub context: String,
    pub candidates: Vec<String>,
    pub label: usize,
}

impl McqRecord {
    pub fn gold(&self) -> &str {
        &self.candidates[self.label]
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.candidates.is_empty() {
            return Err("no candidates".into());
        }
        if self.label >= self.candidates.len() {
            return Err(format!("label {} out of range for {} candidates", self.label, self.candidates.len()));
        }
        let mut seen = HashSet::new();
        for c in &self.candidates {
            if c.is_empty() {
                return Err("empty candidate".into());
            }
            if !seen.insert(c.as_str()) {
                return Err(format!("duplicate candidate `{c}`"));
            }
        }
        Ok(())
    }
}

impl From<&GoalStepExample> for McqRecord {
    fn from(e: &GoalStepExample) -> Self {
        Self {
            id: e.id.clone(),
            dataset: None,
            language: Some(e.language),
            split: None,
            context: e.step_text.clone(),
            candidates: e.candidates.clone(),
            label: e.answer_index,
        }
    }
}

impl From<&IntentInstance> for McqRecord {
    fn from(i: &IntentInstance) -> Self {
        Self {
            id: i.id.clone(),
            dataset: Some(i.dataset),
            language: Some(i.dataset.language()),
            split: Some(i.split),
            context: i.context.clone(),
            candidates: i.candidates.clone(),
            label: i.gold_index,
        }
    }
}

/// Reads and validates every record; any bad line is an error.
pub fn read_mcq<R: BufRead>(reader: R) -> Result<Vec<McqRecord>, McqError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let invalid = |message: String| McqError::Invalid { line: i + 1, message };
        let rec: McqRecord = serde_json::from_str(&line).map_err(|e| invalid(e.to_string()))?;
        rec.validate().map_err(invalid)?;
        out.push(rec);
    }
    Ok(out)
}
