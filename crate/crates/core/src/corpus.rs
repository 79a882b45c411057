//! wikiHow article dumps.
//!
//! A dump is JSON-Lines, one article per line:
//!
//! ```text
//! {"id": "a1", "title": "How to Save Money on Gas", "step_headers": ["find good gas prices"], "related_ids": []}
//! ```
//!
//! The goal of an article is its title with one language-specific "How to"
//! prefix removed; its steps are the bolded paragraph headers, kept verbatim.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Language;
use crate::parallel;

/// How many malformed lines are kept verbatim in a [`ParseReport`].
const MALFORMED_SAMPLE_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read corpus: {0}")]
    Io(#[from] io::Error),
    #[error("{malformed} of {lines} lines are malformed; is this a corpus dump? first bad line {first_line}: {sample}")]
    Format {
        malformed: usize,
        lines: usize,
        first_line: usize,
        sample: String,
    },
}

/// One line of the dump as stored on disk. Unknown fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawArticle {
    pub id: String,
    pub title: String,
    pub step_headers: Vec<String>,
    pub related_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub language: Language,
    pub title: String,
    pub goal: String,
    pub steps: Vec<String>,
    pub related_ids: Vec<String>,
}

impl Article {
    pub fn to_raw(&self) -> RawArticle {
        RawArticle {
            id: self.id.clone(),
            title: self.title.clone(),
            step_headers: self.steps.clone(),
            related_ids: self.related_ids.clone(),
        }
    }
}

/// Title prefixes stripped when deriving goals, per language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixConfig {
    prefixes: BTreeMap<Language, Vec<String>>,
}

impl Default for PrefixConfig {
    fn default() -> Self {
        let mut prefixes = BTreeMap::new();
        prefixes.insert(Language::En, vec!["How to".to_string()]);
        prefixes.insert(Language::Es, vec!["Cómo".to_string(), "Como".to_string()]);
        prefixes.insert(Language::Th, vec!["วิธีการ".to_string(), "วิธี".to_string()]);
        Self { prefixes }
    }
}

impl PrefixConfig {
    pub fn set(&mut self, language: Language, prefixes: Vec<String>) {
        self.prefixes.insert(language, prefixes);
    }

    pub fn get(&self, language: Language) -> &[String] {
        self.prefixes.get(&language).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Strips one leading prefix of `language` from `title` and trims.
///
/// The longest matching prefix wins. Latin-script prefixes match
/// case-insensitively and only on a word boundary ("How to" does not eat the
/// start of "How Tomatoes Grow"); Thai prefixes match exactly. Returns `None`
/// when nothing is left after stripping.
pub fn extract_goal(title: &str, language: Language, prefixes: &PrefixConfig) -> Option<String> {
    let trimmed = title.trim();
    let mut best: Option<&str> = None;
    for prefix in prefixes.get(language) {
        if let Some(rest) = strip_prefix(trimmed, prefix, language) {
            if best.is_none_or(|b| rest.len() < b.len()) {
                best = Some(rest);
            }
        }
    }
    let goal = best.unwrap_or(trimmed).trim();
    (!goal.is_empty()).then(|| goal.to_string())
}

fn strip_prefix<'a>(title: &'a str, prefix: &str, language: Language) -> Option<&'a str> {
    let prefix = prefix.trim();
    if prefix.is_empty() {
        return None;
    }
    if !language.is_latin() {
        return title.strip_prefix(prefix);
    }
    let mut title_chars = title.char_indices();
    for pc in prefix.chars() {
        let (_, tc) = title_chars.next()?;
        if !tc.to_lowercase().eq(pc.to_lowercase()) {
            return None;
        }
    }
    let rest = match title_chars.next() {
        Some((i, _)) => &title[i..],
        None => "",
    };
    match rest.chars().next() {
        Some(c) if c.is_alphanumeric() => None,
        _ => Some(rest),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    /// Non-blank lines seen.
    pub lines: usize,
    pub articles: usize,
    /// Lines that failed to decode, including duplicate ids.
    pub malformed: usize,
    pub duplicate_ids: usize,
    /// Articles dropped because the goal was empty after prefix stripping.
    pub invalid_goal: usize,
    pub self_links_dropped: usize,
    pub dangling_links: usize,
    /// `(line number, reason)` for the first few malformed lines.
    pub malformed_samples: Vec<(usize, String)>,
}

/// Parsed corpus for one language. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub language: Language,
    articles: Vec<Article>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus from already-validated articles. Later duplicates of
    /// an id are ignored.
    pub fn from_articles(language: Language, articles: impl IntoIterator<Item = Article>) -> Self {
        let mut out = Vec::new();
        let mut index = HashMap::new();
        for a in articles {
            if index.contains_key(&a.id) {
                continue;
            }
            index.insert(a.id.clone(), out.len());
            out.push(a);
        }
        Self { language, articles: out, index }
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Article> {
        self.index.get(id).map(|&i| &self.articles[i])
    }

    /// Index of `id` in [`Corpus::articles`].
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Articles in input order.
    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    /// Related ids of `article` that are not in this corpus.
    pub fn dangling_links<'a>(&'a self, article: &'a Article) -> impl Iterator<Item = &'a str> + 'a {
        article
            .related_ids
            .iter()
            .map(String::as_str)
            .filter(move |id| !self.contains(id))
    }

    pub fn dangling_link_count(&self) -> usize {
        self.articles.iter().map(|a| self.dangling_links(a).count()).sum()
    }

    /// A copy without the given article ids. Links to removed articles
    /// become dangling.
    pub fn without<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Corpus {
        let drop: std::collections::HashSet<&str> = ids.into_iter().collect();
        Corpus::from_articles(
            self.language,
            self.articles.iter().filter(|a| !drop.contains(a.id.as_str())).cloned(),
        )
    }

    /// Writes the corpus back in dump format, input order.
    pub fn write_jsonl(&self, w: &mut dyn Write) -> io::Result<()> {
        let raws: Vec<RawArticle> = self.articles.iter().map(Article::to_raw).collect();
        crate::io::write_jsonl(w, &raws)
    }
}

enum LineOutcome {
    Article(Article, usize),
    InvalidGoal,
    Malformed(String),
}

fn decode_line(line: &str, language: Language, prefixes: &PrefixConfig) -> LineOutcome {
    let raw: RawArticle = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return LineOutcome::Malformed(e.to_string()),
    };
    if raw.id.is_empty() {
        return LineOutcome::Malformed("empty id".to_string());
    }
    let Some(goal) = extract_goal(&raw.title, language, prefixes) else {
        return LineOutcome::InvalidGoal;
    };
    let steps = raw
        .step_headers
        .into_iter()
        .filter(|s| !s.trim().is_empty())
        .collect();
    let mut related_ids: Vec<String> = Vec::with_capacity(raw.related_ids.len());
    let mut self_links = 0;
    for r in raw.related_ids {
        if r == raw.id {
            self_links += 1;
        } else if !related_ids.contains(&r) {
            related_ids.push(r);
        }
    }
    LineOutcome::Article(
        Article {
            id: raw.id,
            language,
            title: raw.title,
            goal,
            steps,
            related_ids,
        },
        self_links,
    )
}

/// Parses a corpus dump.
///
/// Blank lines are skipped. Malformed lines (bad JSON, missing fields, empty
/// or duplicate ids) are counted and sampled in the report; more than half
/// of all lines being malformed is fatal. Article order follows the input.
pub fn parse_corpus<R: BufRead>(
    reader: R,
    language: Language,
    prefixes: &PrefixConfig,
) -> Result<(Corpus, ParseReport), CorpusError> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }

    let decoded = parallel::map_collect(&lines, |(_, l)| decode_line(l, language, prefixes));

    let mut report = ParseReport {
        lines: lines.len(),
        ..Default::default()
    };
    let mut articles = Vec::new();
    let mut seen = HashMap::new();
    let note_malformed = |report: &mut ParseReport, line_no: usize, why: String| {
        report.malformed += 1;
        if report.malformed_samples.len() < MALFORMED_SAMPLE_LIMIT {
            report.malformed_samples.push((line_no, why));
        }
    };
    for ((line_no, _), outcome) in lines.iter().zip(decoded) {
        match outcome {
            LineOutcome::Article(a, self_links) => {
                if let Some(first) = seen.get(&a.id) {
                    report.duplicate_ids += 1;
                    note_malformed(&mut report, *line_no, format!("duplicate id `{}` (first on line {first})", a.id));
                    continue;
                }
                seen.insert(a.id.clone(), *line_no);
                report.self_links_dropped += self_links;
                articles.push(a);
            }
            LineOutcome::InvalidGoal => report.invalid_goal += 1,
            LineOutcome::Malformed(why) => note_malformed(&mut report, *line_no, why),
        }
    }

    if report.malformed * 2 > report.lines {
        let (first_line, sample) = report.malformed_samples.first().cloned().unwrap_or_default();
        return Err(CorpusError::Format {
            malformed: report.malformed,
            lines: report.lines,
            first_line,
            sample,
        });
    }

    let corpus = Corpus::from_articles(language, articles);
    report.articles = corpus.len();
    report.dangling_links = corpus.dangling_link_count();
    if report.malformed > 0 {
        log::warn!("{} malformed corpus lines skipped", report.malformed);
    }
    Ok((corpus, report))
}
