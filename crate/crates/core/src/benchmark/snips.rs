//! Snips "custom intent engines" release: one directory per intent holding
//! `train_<Intent>.json` (300 utterances) and `validate_<Intent>.json` (100).
//! Each file maps the intent name to a list of `{"data": [{"text": ..}, ..]}`
//! chunks whose texts concatenate to the utterance.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{inventory_instance, read_file, require_files, BenchmarkError, Dataset, IntentInstance, Split};

/// Raw intent labels, in candidate order.
pub const SNIPS_INTENTS: [&str; 7] = [
    "AddToPlaylist",
    "BookRestaurant",
    "GetWeather",
    "PlayMusic",
    "RateBook",
    "SearchCreativeWork",
    "SearchScreeningEvent",
];

const SNIPS_NAMES: [&str; 7] = [
    "Add to Playlist",
    "Book Restaurant",
    "Get Weather",
    "Play Music",
    "Rate Book",
    "Search Creative Work",
    "Search Screening Event",
];

pub fn snips_intent_name(label: &str) -> Option<&'static str> {
    SNIPS_INTENTS.iter().position(|l| *l == label).map(|i| SNIPS_NAMES[i])
}

fn file_for(root: &Path, prefix: &str, intent: &str) -> PathBuf {
    let nested = root.join(intent).join(format!("{prefix}_{intent}.json"));
    if nested.is_file() {
        return nested;
    }
    let flat = root.join(format!("{prefix}_{intent}.json"));
    if flat.is_file() {
        flat
    } else {
        nested
    }
}

pub(super) fn manifest(root: &Path) -> Vec<PathBuf> {
    ["train", "validate"]
        .iter()
        .flat_map(|p| SNIPS_INTENTS.iter().map(move |i| file_for(root, p, i)))
        .collect()
}

#[derive(Deserialize)]
struct Utterance {
    data: Vec<Chunk>,
}

#[derive(Deserialize)]
struct Chunk {
    text: String,
}

/// Some of the published files are Latin-1 rather than UTF-8.
fn decode(bytes: Vec<u8>) -> String {
    match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => e.into_bytes().iter().map(|&b| b as char).collect(),
    }
}

pub(super) fn load(root: &Path) -> Result<Vec<IntentInstance>, BenchmarkError> {
    require_files(Dataset::Snips, root, &manifest(root))?;
    let mut out = Vec::new();
    for (prefix, split) in [("train", Split::Train), ("validate", Split::Validation)] {
        for intent in SNIPS_INTENTS {
            let path = file_for(root, prefix, intent);
            let text = decode(read_file(&path)?);
            let parsed: BTreeMap<String, Vec<Utterance>> =
                serde_json::from_str(&text).map_err(|e| BenchmarkError::Format {
                    file: path.clone(),
                    message: e.to_string(),
                })?;
            for (label, utterances) in parsed {
                let gold = snips_intent_name(&label).ok_or_else(|| BenchmarkError::UnknownLabel {
                    dataset: Dataset::Snips,
                    file: path.clone(),
                    label: label.clone(),
                })?;
                for (n, u) in utterances.into_iter().enumerate() {
                    let context: String = u.data.iter().map(|c| c.text.as_str()).collect();
                    let id = format!("snips-{split}-{label}-{n}");
                    let inst = inventory_instance(id, Dataset::Snips, split, context.trim().to_string(), &SNIPS_NAMES, gold)
                        .expect("gold comes from the inventory");
                    out.push(inst);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_chunks_and_latin1() {
        let dir = tempfile::tempdir().unwrap();
        for intent in SNIPS_INTENTS {
            let d = dir.path().join(intent);
            std::fs::create_dir_all(&d).unwrap();
            let body = format!(r#"{{"{intent}": [{{"data": [{{"text": "play "}}, {{"text": "Zvooq", "entity": "service"}}]}}]}}"#);
            std::fs::write(d.join(format!("train_{intent}.json")), &body).unwrap();
            let mut latin = format!(r#"{{"{intent}": [{{"data": [{{"text": "caf"#).into_bytes();
            latin.push(0xe9);
            latin.extend_from_slice(br#""}]}]}"#);
            std::fs::write(d.join(format!("validate_{intent}.json")), latin).unwrap();
        }
        let inst = load(dir.path()).unwrap();
        assert_eq!(inst.len(), 14);
        assert_eq!(inst[0].context, "play Zvooq");
        assert_eq!(inst[0].gold(), "Add to Playlist");
        assert_eq!(inst[0].candidates.len(), 7);
        assert_eq!(inst[7].split, Split::Validation);
        assert_eq!(inst[7].context, "café");
    }

    #[test]
    fn unknown_label_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        for intent in SNIPS_INTENTS {
            for prefix in ["train", "validate"] {
                std::fs::write(
                    dir.path().join(format!("{prefix}_{intent}.json")),
                    r#"{"OrderPizza": [{"data": [{"text": "pizza"}]}]}"#,
                )
                .unwrap();
            }
        }
        assert!(matches!(load(dir.path()), Err(BenchmarkError::UnknownLabel { label, .. }) if label == "OrderPizza"));
    }
}
