//! Open-domain evaluation: hold out steps, retrieve the goals most similar
//! to each gold goal, let a scorer rank them against the step, and report
//! mean reciprocal rank and rank-1 accuracy.
//!
//! ```
//! use wikihow_intent::open_domain::{evaluate_open_domain, OpenDomainInstance};
//! use wikihow_intent::scorer::TfIdfScorer;
//! use wikihow_intent::Language;
//!
//! let candidates: Vec<String> = ["Cancel an Order on Amazon", "Cancel an Order on eBay", "Cancel an Online Order"]
//!     .iter()
//!     .map(|s| s.to_string())
//!     .collect();
//! let inst = OpenDomainInstance::new("q1", "find the order that you want to cancel", "Cancel an Online Order", candidates).unwrap();
//! let scorer = TfIdfScorer::fit(candidates_text(&inst), Language::En);
//! let report = evaluate_open_domain(&[inst], &scorer).unwrap();
//! assert!(report.mrr >= report.acc_at_1);
//! # fn candidates_text(i: &OpenDomainInstance) -> Vec<&str> { i.candidate_goals.iter().map(|s| s.as_str()).collect() }
//! ```

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::lang::Language;
use crate::parallel::map_collect;
use crate::pretrain::select_positive_step;
use crate::scorer::{ScoreRequest, Scorer, SparseVec, TfIdf};
use crate::seed::rng_for;

/// Candidate goals per held-out step.
pub const DEFAULT_CANDIDATES: usize = 100;
/// Held-out steps in the reference English setup.
pub const DEFAULT_HOLDOUT: usize = 5_000;

pub const EMBEDDER_PROTOCOL: &str = "mcq-embedder";

#[derive(Debug, Error)]
pub enum OpenDomainError {
    #[error("cannot hold out {requested} steps: only {available} articles have a step")]
    HoldoutTooLarge { requested: usize, available: usize },
    #[error("need at least {k} distinct goals, the index has {available}")]
    TooFewGoals { k: usize, available: usize },
    #[error("no instances to evaluate")]
    Empty,
    #[error("instance `{id}`: {message}")]
    InvalidInstance { id: String, message: String },
    #[error("embedder failed: {0}")]
    Embedder(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A held-out step with the goal of its article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeldOutPair {
    pub article_id: String,
    pub step_text: String,
    pub gold_goal: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Holdout {
    pub pairs: Vec<HeldOutPair>,
    /// Every article not held out, sorted.
    pub remainder_ids: Vec<String>,
}

/// Samples `k` articles that have a step, uniformly without replacement,
/// and pairs each one's longest step with its goal.
///
/// Pairs are sorted by article id. Build the pretraining set from
/// `corpus.without(held-out ids)` to keep the two disjoint.
pub fn hold_out(corpus: &Corpus, k: usize, seed: u64) -> Result<Holdout, OpenDomainError> {
    let mut eligible: Vec<(&str, &str, &str)> = corpus
        .articles()
        .iter()
        .filter_map(|a| select_positive_step(a).map(|s| (a.id.as_str(), s, a.goal.as_str())))
        .collect();
    eligible.sort_unstable_by(|a, b| a.0.cmp(b.0));
    if k > eligible.len() {
        return Err(OpenDomainError::HoldoutTooLarge {
            requested: k,
            available: eligible.len(),
        });
    }
    let mut rng = rng_for(seed, "holdout", &(k as u64).to_le_bytes());
    let mut picked = index::sample(&mut rng, eligible.len(), k).into_vec();
    picked.sort_unstable();
    let pairs: Vec<HeldOutPair> = picked
        .iter()
        .map(|&i| HeldOutPair {
            article_id: eligible[i].0.to_string(),
            step_text: eligible[i].1.to_string(),
            gold_goal: eligible[i].2.to_string(),
        })
        .collect();
    let held: HashSet<&str> = pairs.iter().map(|p| p.article_id.as_str()).collect();
    let mut remainder_ids: Vec<String> = corpus
        .articles()
        .iter()
        .filter(|a| !held.contains(a.id.as_str()))
        .map(|a| a.id.clone())
        .collect();
    remainder_ids.sort_unstable();
    Ok(Holdout { pairs, remainder_ids })
}

/// Maps texts to vectors; similarity is cosine.
pub trait Embedder: Send + Sync {
    fn name(&self) -> String;

    fn embed(&self, texts: &[&str]) -> Result<Vec<SparseVec>, OpenDomainError>;
}

/// TF-IDF vectors over a fitted vocabulary.
pub struct TfIdfEmbedder {
    model: TfIdf,
}

impl TfIdfEmbedder {
    pub fn fit<'a>(texts: impl IntoIterator<Item = &'a str>, language: Language) -> Self {
        Self {
            model: TfIdf::fit(texts, language),
        }
    }
}

impl Embedder for TfIdfEmbedder {
    fn name(&self) -> String {
        "tfidf".into()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<SparseVec>, OpenDomainError> {
        Ok(texts.iter().map(|t| self.model.vectorize(t)).collect())
    }
}

/// One axis per distinct text seen at construction; unknown texts map to
/// the zero vector. Distinct texts are therefore orthogonal.
pub struct OneHotEmbedder {
    axes: std::collections::HashMap<String, u32>,
}

impl OneHotEmbedder {
    pub fn new<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut axes = std::collections::HashMap::new();
        for t in texts {
            let next = axes.len() as u32;
            axes.entry(t.to_string()).or_insert(next);
        }
        Self { axes }
    }
}

impl Embedder for OneHotEmbedder {
    fn name(&self) -> String {
        "one-hot".into()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<SparseVec>, OpenDomainError> {
        Ok(texts
            .iter()
            .map(|t| match self.axes.get(*t) {
                Some(&i) => SparseVec::from_pairs(vec![(i, 1.0)]),
                None => SparseVec::default(),
            })
            .collect())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbedRequest<'a> {
    id: String,
    text: &'a str,
}

#[derive(Debug, Deserialize)]
struct EmbedResponse {
    id: String,
    #[serde(default)]
    vector: Option<Vec<f64>>,
    #[serde(default)]
    error: Option<String>,
}

struct EmbedderIo {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    next_id: u64,
}

/// Embedder process speaking `{"id","text"}` → `{"id","vector"}` after a
/// `{"protocol":"mcq-embedder","version":1}` handshake. Requests are serial.
pub struct ExternalEmbedder {
    name: String,
    io: Mutex<EmbedderIo>,
    child: Option<Child>,
}

impl ExternalEmbedder {
    pub fn from_streams(
        name: impl Into<String>,
        reader: impl Read + Send + 'static,
        writer: impl Write + Send + 'static,
    ) -> Result<Self, OpenDomainError> {
        let mut reader: Box<dyn BufRead + Send> = Box::new(BufReader::new(reader));
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let hs: serde_json::Value =
            serde_json::from_str(line.trim()).map_err(|e| OpenDomainError::Embedder(format!("bad handshake: {e}")))?;
        if hs.get("protocol").and_then(|v| v.as_str()) != Some(EMBEDDER_PROTOCOL)
            || hs.get("version").and_then(|v| v.as_u64()) != Some(1)
        {
            return Err(OpenDomainError::Embedder(format!("unexpected handshake: {}", line.trim())));
        }
        Ok(Self {
            name: name.into(),
            io: Mutex::new(EmbedderIo {
                reader,
                writer: Box::new(writer),
                next_id: 0,
            }),
            child: None,
        })
    }

    pub fn spawn(program: &str, args: &[String]) -> Result<Self, OpenDomainError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        match Self::from_streams(program, stdout, stdin) {
            Ok(mut e) => {
                e.child = Some(child);
                Ok(e)
            }
            Err(err) => {
                let _ = child.kill();
                let _ = child.wait();
                Err(err)
            }
        }
    }
}

impl Drop for ExternalEmbedder {
    fn drop(&mut self) {
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl Embedder for ExternalEmbedder {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn embed(&self, texts: &[&str]) -> Result<Vec<SparseVec>, OpenDomainError> {
        let mut io = self.io.lock().unwrap_or_else(|p| p.into_inner());
        let mut out = Vec::with_capacity(texts.len());
        for text in texts {
            io.next_id += 1;
            let id = format!("e{}", io.next_id);
            let req = serde_json::to_string(&EmbedRequest { id: id.clone(), text }).expect("serializable");
            writeln!(io.writer, "{req}")?;
            io.writer.flush()?;
            let mut line = String::new();
            if io.reader.read_line(&mut line)? == 0 {
                return Err(OpenDomainError::Embedder("embedder closed the stream".into()));
            }
            let resp: EmbedResponse = serde_json::from_str(line.trim())
                .map_err(|e| OpenDomainError::Embedder(format!("malformed response `{}`: {e}", line.trim())))?;
            if resp.id != id {
                return Err(OpenDomainError::Embedder(format!("expected id `{id}`, got `{}`", resp.id)));
            }
            match (resp.vector, resp.error) {
                (_, Some(err)) => return Err(OpenDomainError::Embedder(err)),
                (Some(v), None) if v.iter().all(|x| x.is_finite()) => out.push(SparseVec::from_dense(&v)),
                _ => return Err(OpenDomainError::Embedder(format!("bad vector for `{id}`"))),
            }
        }
        Ok(out)
    }
}

/// Distinct goals with precomputed unit vectors.
pub struct GoalIndex {
    goals: Vec<String>,
    vectors: Vec<SparseVec>,
}

const EMBED_CHUNK: usize = 1024;

impl GoalIndex {
    /// Deduplicates and sorts `goals`, then embeds them in parallel chunks.
    pub fn build<'a>(goals: impl IntoIterator<Item = &'a str>, embedder: &dyn Embedder) -> Result<Self, OpenDomainError> {
        let goals: Vec<String> = goals
            .into_iter()
            .collect::<BTreeSet<&str>>()
            .into_iter()
            .map(str::to_string)
            .collect();
        let chunks: Vec<&[String]> = goals.chunks(EMBED_CHUNK).collect();
        let embedded = map_collect(&chunks, |chunk| {
            let texts: Vec<&str> = chunk.iter().map(String::as_str).collect();
            embedder.embed(&texts)
        });
        let mut vectors = Vec::with_capacity(goals.len());
        for chunk in embedded {
            vectors.extend(chunk?.into_iter().map(|v| v.normalized()));
        }
        if vectors.len() != goals.len() {
            return Err(OpenDomainError::Embedder(format!(
                "{} vectors for {} goals",
                vectors.len(),
                goals.len()
            )));
        }
        Ok(Self { goals, vectors })
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn goals(&self) -> &[String] {
        &self.goals
    }

    /// The gold goal followed by the `k - 1` other goals most similar to it,
    /// by descending cosine with ties broken lexicographically.
    pub fn top_k_similar(&self, gold: &str, k: usize, embedder: &dyn Embedder) -> Result<Vec<String>, OpenDomainError> {
        let others = self.goals.len() - usize::from(self.goals.binary_search_by(|g| g.as_str().cmp(gold)).is_ok());
        if k == 0 || k - 1 > others {
            return Err(OpenDomainError::TooFewGoals {
                k,
                available: others + 1,
            });
        }
        let gold_vec = match self.goals.binary_search_by(|g| g.as_str().cmp(gold)) {
            Ok(i) => self.vectors[i].clone(),
            Err(_) => embedder
                .embed(&[gold])?
                .pop()
                .ok_or_else(|| OpenDomainError::Embedder("no vector returned".into()))?
                .normalized(),
        };
        // goals are sorted, so a stable sort on similarity alone keeps ties
        // in lexicographic order
        let mut scored: Vec<(f64, usize)> = self
            .vectors
            .iter()
            .enumerate()
            .filter(|(i, _)| self.goals[*i] != gold)
            .map(|(i, v)| (gold_vec.dot(v), i))
            .collect();
        let take = k - 1;
        if take < scored.len() {
            scored.select_nth_unstable_by(take, cmp_desc);
            scored.truncate(take);
        }
        scored.sort_by(cmp_desc);
        let mut out = Vec::with_capacity(k);
        out.push(gold.to_string());
        out.extend(scored.into_iter().map(|(_, i)| self.goals[i].clone()));
        Ok(out)
    }
}

fn cmp_desc(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenDomainInstance {
    pub id: String,
    pub step_text: String,
    pub gold_goal: String,
    pub candidate_goals: Vec<String>,
}

impl OpenDomainInstance {
    pub fn new(
        id: impl Into<String>,
        step_text: impl Into<String>,
        gold_goal: impl Into<String>,
        candidate_goals: Vec<String>,
    ) -> Result<Self, OpenDomainError> {
        let inst = Self {
            id: id.into(),
            step_text: step_text.into(),
            gold_goal: gold_goal.into(),
            candidate_goals,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Gold appears exactly once and candidates are pairwise distinct.
    pub fn validate(&self) -> Result<(), OpenDomainError> {
        let invalid = |message: String| OpenDomainError::InvalidInstance {
            id: self.id.clone(),
            message,
        };
        let distinct: HashSet<&String> = self.candidate_goals.iter().collect();
        if distinct.len() != self.candidate_goals.len() {
            return Err(invalid("duplicate candidate goals".into()));
        }
        if !distinct.contains(&self.gold_goal) {
            return Err(invalid(format!("gold goal `{}` is not a candidate", self.gold_goal)));
        }
        if self.candidate_goals.len() < 2 {
            return Err(invalid("needs at least two candidates".into()));
        }
        Ok(())
    }

    pub fn gold_index(&self) -> usize {
        self.candidate_goals
            .iter()
            .position(|g| *g == self.gold_goal)
            .expect("validated instance contains gold")
    }
}

/// Builds one instance per held-out pair with `k` retrieved candidates,
/// listed in lexicographic order so the gold position carries no signal.
pub fn build_instances(
    pairs: &[HeldOutPair],
    index: &GoalIndex,
    k: usize,
    embedder: &dyn Embedder,
) -> Result<Vec<OpenDomainInstance>, OpenDomainError> {
    map_collect(pairs, |p| {
        let mut candidates = index.top_k_similar(&p.gold_goal, k, embedder)?;
        candidates.sort_unstable();
        OpenDomainInstance::new(p.article_id.clone(), p.step_text.clone(), p.gold_goal.clone(), candidates)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub id: String,
    pub gold_rank: usize,
    pub reciprocal_rank: f64,
    /// The scorer failed; the gold is placed last.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenDomainReport {
    pub scorer: String,
    pub instances: usize,
    pub mrr: f64,
    pub acc_at_1: f64,
    pub failures: usize,
    pub ranks: Vec<RankingResult>,
}

/// 1-based rank of `gold` after a stable descending sort of `scores`: the
/// candidates scoring strictly higher, plus equal scores at lower indices.
pub fn gold_rank(scores: &[f64], gold: usize) -> usize {
    let g = scores[gold];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(i, &s)| s > g || (s == g && i < gold))
        .count()
}

const SCORE_CHUNK: usize = 64;

pub fn evaluate_open_domain(instances: &[OpenDomainInstance], scorer: &dyn Scorer) -> Result<OpenDomainReport, OpenDomainError> {
    if instances.is_empty() {
        return Err(OpenDomainError::Empty);
    }
    for inst in instances {
        inst.validate()?;
    }
    let chunks: Vec<&[OpenDomainInstance]> = instances.chunks(SCORE_CHUNK).collect();
    let ranks: Vec<RankingResult> = map_collect(&chunks, |chunk| {
        let requests: Vec<ScoreRequest> = chunk
            .iter()
            .map(|i| ScoreRequest::new(i.id.clone(), i.step_text.clone(), i.candidate_goals.clone()))
            .collect();
        let results = scorer.score_batch(&requests);
        chunk
            .iter()
            .zip(requests.iter().zip(results))
            .map(|(inst, (req, res))| {
                let scored = res.and_then(|s| s.check(req).map(|_| s));
                let (rank, failed) = match scored {
                    Ok(s) => (gold_rank(&s.scores, inst.gold_index()), false),
                    Err(e) => {
                        log::warn!("open-domain instance `{}` failed: {e}", inst.id);
                        (inst.candidate_goals.len(), true)
                    }
                };
                RankingResult {
                    id: inst.id.clone(),
                    gold_rank: rank,
                    reciprocal_rank: 1.0 / rank as f64,
                    failed,
                }
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let n = ranks.len() as f64;
    Ok(OpenDomainReport {
        scorer: scorer.name(),
        instances: ranks.len(),
        mrr: ranks.iter().map(|r| r.reciprocal_rank).sum::<f64>() / n,
        acc_at_1: ranks.iter().filter(|r| r.gold_rank == 1).count() as f64 / n,
        failures: ranks.iter().filter(|r| r.failed).count(),
        ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Article;
    use crate::scorer::{CandidateScores, ScorerError, TfIdfScorer};
    use proptest::prelude::*;

    fn article(id: &str, goal: &str, steps: &[&str]) -> Article {
        Article {
            id: id.into(),
            language: Language::En,
            title: format!("How to {goal}"),
            goal: goal.into(),
            steps: steps.iter().map(|s| s.to_string()).collect(),
            related_ids: vec![],
        }
    }

    fn corpus(n: usize) -> Corpus {
        Corpus::from_articles(
            Language::En,
            (0..n).map(|i| article(&format!("a{i:03}"), &format!("Goal {i}"), &[&format!("do thing {i}"), "x"])),
        )
    }

    #[test]
    fn holdout_partitions() {
        let c = corpus(50);
        let h = hold_out(&c, 10, 13).unwrap();
        assert_eq!(h.pairs.len(), 10);
        assert_eq!(h.remainder_ids.len(), 40);
        let held: HashSet<&str> = h.pairs.iter().map(|p| p.article_id.as_str()).collect();
        assert!(h.remainder_ids.iter().all(|id| !held.contains(id.as_str())));
        assert!(h.pairs.iter().all(|p| p.step_text.starts_with("do thing")));
        assert_eq!(hold_out(&c, 10, 13).unwrap(), h);
        let empty = hold_out(&c, 0, 13).unwrap();
        assert!(empty.pairs.is_empty() && empty.remainder_ids.len() == 50);
        assert!(matches!(hold_out(&c, 51, 13), Err(OpenDomainError::HoldoutTooLarge { .. })));
    }

    #[test]
    fn one_hot_top_k_picks_lexicographic_smallest() {
        let goals = ["pear", "apple", "fig", "banana", "cherry"];
        let e = OneHotEmbedder::new(goals);
        let idx = GoalIndex::build(goals, &e).unwrap();
        assert_eq!(idx.top_k_similar("fig", 3, &e).unwrap(), vec!["fig", "apple", "banana"]);
        assert_eq!(idx.top_k_similar("apple", 3, &e).unwrap(), vec!["apple", "banana", "cherry"]);
        let all = idx.top_k_similar("pear", 5, &e).unwrap();
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 5);
        assert!(matches!(idx.top_k_similar("pear", 6, &e), Err(OpenDomainError::TooFewGoals { .. })));
    }

    #[test]
    fn tfidf_top_k_prefers_similar_goals() {
        let goals = [
            "Cancel an Order on eBay",
            "Cancel an Online Order",
            "Cancel an Order on Amazon",
            "Bake Bread",
            "Tie a Tie",
            "Cancel a Subscription",
        ];
        let e = TfIdfEmbedder::fit(goals, Language::En);
        let idx = GoalIndex::build(goals, &e).unwrap();
        let top = idx.top_k_similar("Cancel an Online Order", 3, &e).unwrap();
        assert_eq!(top[0], "Cancel an Online Order");
        assert!(top[1..].iter().all(|g| g.contains("Order")), "{top:?}");
    }

    #[test]
    fn rank_examples() {
        assert_eq!(gold_rank(&[0.1, 0.9, 0.5], 1), 1);
        assert_eq!(gold_rank(&[0.1, 0.9, 0.5], 2), 2);
        assert_eq!(gold_rank(&[0.5, 0.5, 0.5], 2), 3);
        assert_eq!(gold_rank(&[0.5, 0.5, 0.5], 0), 1);
    }

    struct GoldSecond;

    impl Scorer for GoldSecond {
        fn name(&self) -> String {
            "gold-second".into()
        }

        fn score(&self, r: &ScoreRequest) -> Result<CandidateScores, ScorerError> {
            // step text is "gold:<goal>"
            let gold = r.context.trim_start_matches("gold:");
            let g = r.candidates.iter().position(|c| c == gold).unwrap();
            let other = if g == 0 { 1 } else { 0 };
            let scores = (0..r.candidates.len())
                .map(|i| if i == other { 2.0 } else if i == g { 1.0 } else { 0.0 })
                .collect();
            Ok(CandidateScores { id: r.id.clone(), scores })
        }
    }

    fn instances(n: usize) -> Vec<OpenDomainInstance> {
        (0..n)
            .map(|i| {
                let cands: Vec<String> = (0..5).map(|j| format!("goal {i} {j}")).collect();
                let gold = cands[i % 5].clone();
                OpenDomainInstance::new(format!("q{i}"), format!("gold:{gold}"), gold, cands).unwrap()
            })
            .collect()
    }

    #[test]
    fn gold_second_gives_half() {
        let r = evaluate_open_domain(&instances(20), &GoldSecond).unwrap();
        assert_eq!(r.mrr, 0.5);
        assert_eq!(r.acc_at_1, 0.0);
        assert!(matches!(evaluate_open_domain(&[], &GoldSecond), Err(OpenDomainError::Empty)));
    }

    #[test]
    fn verbatim_goal_gets_rank_one() {
        let insts: Vec<OpenDomainInstance> = (0..10)
            .map(|i| {
                let cands: Vec<String> = (0..10).map(|j| format!("goal{j}")).collect();
                OpenDomainInstance::new(format!("q{i}"), format!("to reach goal{i} quickly"), format!("goal{i}"), cands)
                    .unwrap()
            })
            .collect();
        let s = TfIdfScorer::fit(insts.iter().map(|i| i.step_text.as_str()), Language::En);
        let r = evaluate_open_domain(&insts, &s).unwrap();
        assert_eq!((r.mrr, r.acc_at_1), (1.0, 1.0));
    }

    #[test]
    fn invalid_instances_rejected() {
        let c = vec!["a".to_string(), "a".to_string()];
        assert!(OpenDomainInstance::new("x", "s", "a", c).is_err());
        let c = vec!["a".to_string(), "b".to_string()];
        assert!(OpenDomainInstance::new("x", "s", "z", c).is_err());
    }

    proptest! {
        #[test]
        fn permuting_candidates_keeps_rank(scores in prop::collection::vec(0u8..4, 2..12), gold_seed in 0usize..100, rot in 0usize..12) {
            // distinct values so the ranking is tie-free under any permutation
            let scores: Vec<f64> = scores.iter().enumerate().map(|(i, &s)| s as f64 + i as f64 * 1e-3).collect();
            let gold = gold_seed % scores.len();
            let r = rot % scores.len();
            let mut permuted = scores.clone();
            permuted.rotate_left(r);
            let new_gold = (gold + scores.len() - r) % scores.len();
            prop_assert_eq!(gold_rank(&scores, gold), gold_rank(&permuted, new_gold));
        }
    }
}
