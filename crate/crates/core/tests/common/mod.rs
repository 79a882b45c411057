//! Fixture generators shared by the integration tests: synthetic article
//! dumps and mirrors of the benchmark releases in their published file
//! layouts.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wikihow_intent::corpus::{Article, Corpus, RawArticle};
use wikihow_intent::Language;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ze", "po", "qu", "da", "fe", "gi", "hu", "ja",
];

/// Pronounceable ASCII word number `i`; distinct for distinct `i`.
pub fn word(mut i: usize) -> String {
    let mut w = String::new();
    loop {
        w.push_str(SYLLABLES[i % SYLLABLES.len()]);
        i /= SYLLABLES.len();
        if i == 0 {
            break;
        }
    }
    w
}

/// `n` articles with random 2-4 word goals drawn from a `vocab`-word
/// vocabulary, 0-5 steps and 0-8 related ids (some dangling).
pub fn synthetic_articles(n: usize, vocab: usize, seed: u64) -> Vec<RawArticle> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let words = r.random_range(2..=4);
            let goal: Vec<String> = (0..words).map(|_| word(r.random_range(0..vocab))).collect();
            let steps = r.random_range(0..=5);
            let step_headers = (0..steps)
                .map(|s| {
                    let len = r.random_range(1..=6);
                    let mut t = format!("step {s}");
                    for _ in 0..len {
                        t.push(' ');
                        t.push_str(&word(r.random_range(0..vocab)));
                    }
                    t
                })
                .collect();
            let related = r.random_range(0..=8);
            let related_ids = (0..related)
                .map(|_| {
                    if r.random_bool(0.05) {
                        format!("missing-{}", r.random_range(0..1000))
                    } else {
                        format!("a{:06}", r.random_range(0..n))
                    }
                })
                .collect();
            RawArticle {
                id: format!("a{i:06}"),
                title: format!("How to {}", goal.join(" ")),
                step_headers,
                related_ids,
            }
        })
        .collect()
}

pub fn to_jsonl(articles: &[RawArticle]) -> String {
    let mut s = String::new();
    for a in articles {
        s.push_str(&serde_json::to_string(a).unwrap());
        s.push('\n');
    }
    s
}

pub fn corpus_from(articles: Vec<Article>) -> Corpus {
    Corpus::from_articles(Language::En, articles)
}

pub fn article(id: &str, goal: &str, steps: &[&str], related: &[&str]) -> Article {
    Article {
        id: id.into(),
        language: Language::En,
        title: format!("How to {goal}"),
        goal: goal.into(),
        steps: steps.iter().map(|s| s.to_string()).collect(),
        related_ids: related.iter().map(|s| s.to_string()).collect(),
    }
}

/// Published split sizes that the mirrors reproduce.
pub const SNIPS_PER_INTENT: (usize, usize) = (300, 100);
pub const SGD_SIZES: (usize, usize, usize) = (163_197, 24_320, 42_922);
pub const FB_SIZES: [(&str, usize, usize, usize); 3] = [
    ("en", 30_521, 4_181, 8_621),
    ("es", 3_617, 1_983, 3_043),
    ("th", 2_156, 1_235, 1_692),
];

/// Utterance for an intent: filler words, plus (60% of the time) one word
/// of the intent's name at a random position.
fn utterance(r: &mut ChaCha8Rng, cue_words: &[&str], filler: &[&str]) -> String {
    let mut words: Vec<&str> = (0..r.random_range(3..8)).map(|_| *filler.choose(r).unwrap()).collect();
    if r.random_bool(0.6) {
        let cue = cue_words.choose(r).unwrap();
        let at = r.random_range(0..=words.len());
        words.insert(at, cue);
    }
    words.join(" ")
}

const EN_FILLER: [&str; 12] = [
    "please", "could", "you", "my", "the", "for", "me", "now", "today", "a", "this", "tonight",
];
const ES_FILLER: [&str; 8] = ["por", "favor", "mi", "para", "hoy", "el", "la", "mañana"];
const TH_FILLER: [&str; 6] = ["ช่วย", "หน่อย", "ของฉัน", "วันนี้", "ให้", "ที่"];

const SNIPS_INTENTS: [(&str, &[&str]); 7] = [
    ("AddToPlaylist", &["add", "playlist"]),
    ("BookRestaurant", &["book", "restaurant"]),
    ("GetWeather", &["weather"]),
    ("PlayMusic", &["play", "music"]),
    ("RateBook", &["rate"]),
    ("SearchCreativeWork", &["creative", "work"]),
    ("SearchScreeningEvent", &["screening", "event"]),
];

/// `root/<Intent>/{train,validate}_<Intent>.json`, 300 + 100 per intent.
pub fn write_snips_mirror(root: &Path, seed: u64) {
    let mut r = rng(seed);
    for (intent, cues) in SNIPS_INTENTS {
        let dir = root.join(intent);
        fs::create_dir_all(&dir).unwrap();
        for (prefix, n) in [("train", SNIPS_PER_INTENT.0), ("validate", SNIPS_PER_INTENT.1)] {
            let utts: Vec<serde_json::Value> = (0..n)
                .map(|_| {
                    let text = utterance(&mut r, cues, &EN_FILLER);
                    let (a, b) = text.split_at(text.len() / 2);
                    json!({"data": [{"text": a}, {"text": b, "entity": "x"}]})
                })
                .collect();
            let body = json!({ intent: utts });
            fs::write(dir.join(format!("{prefix}_{intent}.json")), body.to_string()).unwrap();
        }
    }
}

const FB_LABELS: [(&str, &[&str]); 12] = [
    ("alarm/cancel_alarm", &["cancel", "alarm"]),
    ("alarm/modify_alarm", &["modify", "alarm"]),
    ("alarm/set_alarm", &["set", "alarm"]),
    ("alarm/show_alarms", &["show", "alarms"]),
    ("alarm/snooze_alarm", &["snooze"]),
    ("alarm/time_left_on_alarm", &["time", "left"]),
    ("reminder/cancel_reminder", &["cancel", "reminder"]),
    ("reminder/set_reminder", &["set", "reminder"]),
    ("reminder/show_reminders", &["show", "reminders"]),
    ("weather/checkSunrise", &["sunrise"]),
    ("weather/checkSunset", &["sunset"]),
    ("weather/find", &["weather"]),
];

/// `root/<lang>/{train,eval,test}-<lang>.tsv` with the published row counts.
pub fn write_fb_mirror(root: &Path, seed: u64) {
    let mut r = rng(seed);
    for (lang, train, eval, test) in FB_SIZES {
        let dir = root.join(lang);
        fs::create_dir_all(&dir).unwrap();
        let filler: &[&str] = match lang {
            "en" => &EN_FILLER,
            "es" => &ES_FILLER,
            _ => &TH_FILLER,
        };
        for (split, n) in [("train", train), ("eval", eval), ("test", test)] {
            let mut body = String::new();
            for _ in 0..n {
                let (label, cues) = FB_LABELS.choose(&mut r).unwrap();
                let text = utterance(&mut r, cues, filler);
                writeln!(body, "{label}\t\t{text}\t{lang}\t{{}}").unwrap();
            }
            fs::write(dir.join(format!("{split}-{lang}.tsv")), body).unwrap();
        }
    }
}

const SGD_SERVICES: [(&str, [&str; 4]); 4] = [
    ("Restaurants_1", ["FindRestaurants", "ReserveRestaurant", "GetDirections", "ShareLocation"]),
    ("Flights_1", ["SearchOnewayFlight", "SearchRoundtripFlight", "ReserveOnewayFlight", "ReserveRoundtripFlight"]),
    ("Music_1", ["LookupMusic", "PlaySong", "AddToPlaylist", "ShuffleQueue"]),
    ("Media_1", ["FindMovies", "PlayMovie", "RentMovie", "RateMovie"]),
];

const USER_TURNS_PER_DIALOGUE: usize = 10;
const DIALOGUES_PER_FILE: usize = 1_000;

/// `root/{train,dev,test}/{schema.json,dialogues_NNN.json}` where every
/// user turn carries one frame with an active intent, so the instance count
/// equals the number of user turns.
pub fn write_sgd_mirror(root: &Path, seed: u64) {
    let mut r = rng(seed);
    let schema: Vec<serde_json::Value> = SGD_SERVICES
        .iter()
        .map(|(name, intents)| {
            json!({
                "service_name": name,
                "description": "synthetic",
                "slots": [],
                "intents": intents.iter().map(|i| json!({"name": i, "description": "", "is_transactional": false})).collect::<Vec<_>>(),
            })
        })
        .collect();
    for (dir, n) in [("train", SGD_SIZES.0), ("dev", SGD_SIZES.1), ("test", SGD_SIZES.2)] {
        let d = root.join(dir);
        fs::create_dir_all(&d).unwrap();
        fs::write(d.join("schema.json"), serde_json::to_string(&schema).unwrap()).unwrap();
        let mut remaining = n;
        let mut dialogue_no = 0;
        let mut file_no = 0;
        while remaining > 0 {
            file_no += 1;
            let mut dialogues = Vec::new();
            while remaining > 0 && dialogues.len() < DIALOGUES_PER_FILE {
                dialogue_no += 1;
                let (service, intents) = SGD_SERVICES.choose(&mut r).unwrap();
                let users = remaining.min(USER_TURNS_PER_DIALOGUE);
                remaining -= users;
                let mut turns = Vec::with_capacity(users * 2);
                for _ in 0..users {
                    let intent = intents.choose(&mut r).unwrap();
                    let human = wikihow_intent::benchmark::humanize_intent(intent).to_lowercase();
                    let cues: Vec<&str> = human.split(' ').collect();
                    let text = utterance(&mut r, &cues, &EN_FILLER);
                    turns.push(json!({
                        "speaker": "USER",
                        "utterance": text,
                        "frames": [{"service": service, "slots": [], "state": {"active_intent": intent, "slot_values": {}}}],
                    }));
                    turns.push(json!({"speaker": "SYSTEM", "utterance": "sure", "frames": [{"service": service, "slots": []}]}));
                }
                dialogues.push(json!({
                    "dialogue_id": format!("{dir}_{dialogue_no:06}"),
                    "services": [service],
                    "turns": turns,
                }));
            }
            fs::write(
                d.join(format!("dialogues_{file_no:03}.json")),
                serde_json::to_string(&dialogues).unwrap(),
            )
            .unwrap();
        }
    }
}

/// Writes all three mirrors under `root/{snips,sgd,fb}`.
pub fn write_benchmark_mirrors(root: &Path, seed: u64) {
    write_snips_mirror(&root.join("snips"), seed);
    write_sgd_mirror(&root.join("sgd"), seed + 1);
    write_fb_mirror(&root.join("fb"), seed + 2);
}

/// Picks a random permutation of `0..n`.
pub fn permutation(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(r);
    v
}
