//! Goal/step multiple-choice datasets built from wikiHow, plus the tooling to
//! cast intent-detection benchmarks into the same format and score them.
//!
//! The crate is organised around the data flow:
//!
//! * [`corpus`] parses a JSON-Lines article dump and derives goals and steps.
//! * [`pretrain`] turns a corpus into 4-choose-1 goal/step examples with
//!   hard negatives found by walking the related-article graph.
//! * [`benchmark`] loads Snips, SGD and the multilingual Facebook datasets
//!   and casts every instance into a k-choose-1 question.
//! * [`scorer`] defines what a scorer is, ships a TF-IDF baseline and a
//!   client for external scorers speaking a line-delimited JSON protocol.
//! * [`metrics`] holds accuracy, the one-sided t-test and learning curves.
//! * [`open_domain`] ranks a step against its 100 nearest goals and reports
//!   MRR and rank-1 accuracy.
//!
//! Data-parallel loops go through [`parallel`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.

pub mod benchmark;
pub mod corpus;
pub mod error;
pub mod io;
pub mod lang;
pub mod mcq;
pub mod metrics;
pub mod open_domain;
pub mod parallel;
pub mod pretrain;
pub mod scorer;
pub mod seed;

pub use error::{Error, Result};
pub use lang::Language;
