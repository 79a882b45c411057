//! Schema-Guided Dialogue: `train/`, `dev/` and `test/` directories, each
//! with a `schema.json` and numbered `dialogues_*.json` files.
//!
//! Every user frame with an active intent becomes one instance. The context
//! is the last three utterances of the dialogue up to and including the
//! user's turn, joined by single spaces; the candidates are the intents of
//! the frame's service schema.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{read_file, require_files, BenchmarkError, Dataset, IntentInstance, Split};

/// Utterances of dialogue history fed as context.
pub const SGD_CONTEXT_UTTERANCES: usize = 3;

const SPLIT_DIRS: [(&str, Split); 3] = [("train", Split::Train), ("dev", Split::Validation), ("test", Split::Test)];

#[derive(Deserialize)]
struct Service {
    service_name: String,
    intents: Vec<SchemaIntent>,
}

#[derive(Deserialize)]
struct SchemaIntent {
    name: String,
}

#[derive(Deserialize)]
struct Dialogue {
    dialogue_id: String,
    turns: Vec<Turn>,
}

#[derive(Deserialize)]
struct Turn {
    speaker: String,
    utterance: String,
    #[serde(default)]
    frames: Vec<Frame>,
}

#[derive(Deserialize)]
struct Frame {
    service: String,
    #[serde(default)]
    state: Option<FrameState>,
}

#[derive(Deserialize)]
struct FrameState {
    active_intent: String,
}

/// `FindRestaurants` -> `Find Restaurants`.
pub fn humanize_intent(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut out = String::with_capacity(name.len() + 4);
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' {
            out.push(' ');
            continue;
        }
        if i > 0 && c.is_uppercase() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                out.push(' ');
            }
        }
        out.push(c);
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn dialogue_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("dialogues_") && n.ends_with(".json"))
        })
        .collect();
    files.sort();
    files
}

pub(super) fn manifest(root: &Path) -> Vec<PathBuf> {
    SPLIT_DIRS
        .iter()
        .flat_map(|(d, _)| [root.join(d).join("schema.json"), root.join(d).join("dialogues_*.json")])
        .collect()
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, BenchmarkError> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| BenchmarkError::Format {
        file: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub(super) fn load(root: &Path) -> Result<Vec<IntentInstance>, BenchmarkError> {
    let schemas: Vec<PathBuf> = SPLIT_DIRS.iter().map(|(d, _)| root.join(d).join("schema.json")).collect();
    let missing_dialogues = SPLIT_DIRS.iter().any(|(d, _)| dialogue_files(&root.join(d)).is_empty());
    if missing_dialogues {
        return Err(BenchmarkError::MissingFiles {
            dataset: Dataset::Sgd,
            root: root.to_path_buf(),
            expected: manifest(root),
        });
    }
    require_files(Dataset::Sgd, root, &schemas)?;

    let mut out = Vec::new();
    for (dir, split) in SPLIT_DIRS {
        let dir = root.join(dir);
        let schema_path = dir.join("schema.json");
        let services: Vec<Service> = parse_json(&schema_path)?;
        let intents: HashMap<String, Vec<(String, String)>> = services
            .into_iter()
            .map(|s| {
                let names = s.intents.into_iter().map(|i| {
                    let human = humanize_intent(&i.name);
                    (i.name, human)
                });
                (s.service_name, names.collect())
            })
            .collect();

        for file in dialogue_files(&dir) {
            let dialogues: Vec<Dialogue> = parse_json(&file)?;
            for dialogue in dialogues {
                let utterances: Vec<&str> = dialogue.turns.iter().map(|t| t.utterance.trim()).collect();
                for (t, turn) in dialogue.turns.iter().enumerate() {
                    if !turn.speaker.eq_ignore_ascii_case("user") {
                        continue;
                    }
                    for frame in &turn.frames {
                        let Some(active) = frame.state.as_ref().map(|s| s.active_intent.as_str()) else {
                            continue;
                        };
                        if active == "NONE" || active.is_empty() {
                            continue;
                        }
                        let service = intents.get(&frame.service).ok_or_else(|| BenchmarkError::Format {
                            file: file.clone(),
                            message: format!("service `{}` is not in {}", frame.service, schema_path.display()),
                        })?;
                        let gold_index = service.iter().position(|(raw, _)| raw == active).ok_or_else(|| {
                            BenchmarkError::UnknownLabel {
                                dataset: Dataset::Sgd,
                                file: file.clone(),
                                label: format!("{}:{active}", frame.service),
                            }
                        })?;
                        let start = (t + 1).saturating_sub(SGD_CONTEXT_UTTERANCES);
                        out.push(IntentInstance {
                            id: format!("{}/{t}/{}", dialogue.dialogue_id, frame.service),
                            dataset: Dataset::Sgd,
                            split,
                            context: utterances[start..=t].join(" "),
                            candidates: service.iter().map(|(_, h)| h.clone()).collect(),
                            gold_index,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}
