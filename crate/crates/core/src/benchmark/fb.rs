//! Facebook multilingual task-oriented dialog data: `<lang>/train-<lang>.tsv`,
//! `eval-<lang>.tsv` and `test-<lang>.tsv`. Column 0 is the intent label
//! (`alarm/set_alarm`), column 2 the utterance; slot and token columns are
//! ignored.

use std::path::{Path, PathBuf};

use super::{inventory_instance, read_file, require_files, BenchmarkError, Dataset, IntentInstance, Split};

/// Raw labels and display names, in candidate order.
pub const FB_INTENTS: [(&str, &str); 12] = [
    ("alarm/cancel_alarm", "Cancel Alarm"),
    ("alarm/modify_alarm", "Modify Alarm"),
    ("alarm/set_alarm", "Set Alarm"),
    ("alarm/show_alarms", "Show Alarms"),
    ("alarm/snooze_alarm", "Snooze Alarm"),
    ("alarm/time_left_on_alarm", "Check Time Left on Alarm"),
    ("reminder/cancel_reminder", "Cancel Reminder"),
    ("reminder/set_reminder", "Set Reminder"),
    ("reminder/show_reminders", "Show Reminders"),
    ("weather/checkSunrise", "Check Sunrise"),
    ("weather/checkSunset", "Check Sunset"),
    ("weather/find", "Find Weather"),
];

pub fn fb_intent_name(label: &str) -> Option<&'static str> {
    FB_INTENTS.iter().find(|(l, _)| *l == label).map(|(_, n)| *n)
}

fn lang_code(dataset: Dataset) -> &'static str {
    dataset.language().code()
}

fn file_for(dataset: Dataset, root: &Path, split: &str) -> PathBuf {
    let lang = lang_code(dataset);
    let name = format!("{split}-{lang}.tsv");
    let nested = root.join(lang).join(&name);
    if !nested.is_file() && root.join(&name).is_file() {
        root.join(name)
    } else {
        nested
    }
}

const SPLIT_FILES: [(&str, Split); 3] = [("train", Split::Train), ("eval", Split::Validation), ("test", Split::Test)];

pub(super) fn manifest(dataset: Dataset, root: &Path) -> Vec<PathBuf> {
    SPLIT_FILES.iter().map(|(s, _)| file_for(dataset, root, s)).collect()
}

pub(super) fn load(dataset: Dataset, root: &Path) -> Result<Vec<IntentInstance>, BenchmarkError> {
    require_files(dataset, root, &manifest(dataset, root))?;
    let names: Vec<&str> = FB_INTENTS.iter().map(|(_, n)| *n).collect();
    let mut out = Vec::new();
    for (stem, split) in SPLIT_FILES {
        let path = file_for(dataset, root, stem);
        let bytes = read_file(&path)?;
        let text = String::from_utf8(bytes).map_err(|e| BenchmarkError::Format {
            file: path.clone(),
            message: e.to_string(),
        })?;
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 3 {
                return Err(BenchmarkError::Format {
                    file: path.clone(),
                    message: format!("line {}: expected at least 3 tab-separated columns", n + 1),
                });
            }
            let gold = fb_intent_name(cols[0].trim()).ok_or_else(|| BenchmarkError::UnknownLabel {
                dataset,
                file: path.clone(),
                label: cols[0].to_string(),
            })?;
            let id = format!("{}-{split}-{}", dataset.name(), n + 1);
            let inst = inventory_instance(id, dataset, split, cols[2].trim().to_string(), &names, gold)
                .expect("gold comes from the inventory");
            out.push(inst);
        }
    }
    Ok(out)
}
