//! Languages and the per-language tokenizers shared by lexical overlap and
//! the TF-IDF baseline.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Es,
    Th,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::En, Language::Es, Language::Th];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Es => "es",
            Language::Th => "th",
        }
    }

    /// Latin-script languages compare case-insensitively and split on word
    /// boundaries; Thai has neither case nor spaces between words.
    pub fn is_latin(self) -> bool {
        matches!(self, Language::En | Language::Es)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "es" => Ok(Language::Es),
            "th" => Ok(Language::Th),
            other => Err(format!("unknown language `{other}` (expected en, es or th)")),
        }
    }
}

/// Splits `text` into tokens, keeping duplicates and order.
///
/// For en/es a token is a maximal run of alphanumeric characters, lowercased.
/// For th every whitespace-separated chunk contributes its character
/// trigrams; chunks shorter than three characters are kept whole.
pub fn tokenize(text: &str, language: Language) -> Vec<String> {
    if language.is_latin() {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect()
    } else {
        let mut out = Vec::new();
        for chunk in text.split_whitespace() {
            let chars: Vec<char> = chunk.chars().collect();
            if chars.len() < 3 {
                out.push(chunk.to_string());
            } else {
                out.extend(chars.windows(3).map(|w| w.iter().collect::<String>()));
            }
        }
        out
    }
}

pub fn token_set(text: &str, language: Language) -> BTreeSet<String> {
    tokenize(text, language).into_iter().collect()
}

/// Jaccard similarity of two token sets; 0 when both are empty.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}
