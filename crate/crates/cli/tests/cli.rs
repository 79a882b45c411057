//! Drives the `whintent` binary end to end and checks outputs and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn whintent(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whintent"))
        .args(args)
        .current_dir(dir)
        .env_remove("WHINTENT_SEED")
        .env_remove("WHINTENT_WORKERS")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const GOALS: [&str; 12] = [
    "Boil an Egg",
    "Bake Bread",
    "Paint a Fence",
    "Fix a Flat Tire",
    "Wash a Car",
    "Plant Tomatoes",
    "Tie a Tie",
    "Clean an Oven",
    "Learn to Swim",
    "Write a Letter",
    "Change a Bulb",
    "Fold a Shirt",
];

/// Twelve articles whose longest step repeats the goal words.
fn write_corpus(dir: &Path) -> PathBuf {
    let mut s = String::new();
    for (i, g) in GOALS.iter().enumerate() {
        let related: Vec<String> = (1..=4).map(|k| format!("w{}", (i + k) % GOALS.len())).collect();
        let line = json!({
            "id": format!("w{i}"),
            "title": format!("How to {g}"),
            "step_headers": ["Start", format!("Now {} carefully", g.to_lowercase())],
            "related_ids": related,
        });
        s.push_str(&line.to_string());
        s.push('\n');
    }
    let p = dir.join("corpus.jsonl");
    fs::write(&p, s).unwrap();
    p
}

#[test]
fn build_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d);
    let o = whintent(d, &["build", "--corpus", "corpus.jsonl", "--lang", "en", "--out", "wh.jsonl", "--traces", "traces.jsonl"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines: Vec<Value> = fs::read_to_string(d.join("wh.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 12);
    for l in &lines {
        assert_eq!(l["candidates"].as_array().unwrap().len(), 4);
        assert!(l["step"].as_str().unwrap().starts_with("Now "));
    }
    let summary = read_json(&d.join("wh.summary.json"));
    assert_eq!(summary["summary"]["examples"], 12);
    assert_eq!(summary["run"]["seed"], 13);
    assert!(summary["run"]["inputs"][0]["sha256"].as_str().unwrap().len() == 64);
    assert!(d.join("wh.run.json").is_file());
    assert!(d.join("traces.jsonl").is_file());

    // same seed, different worker count: identical bytes
    let again = whintent(d, &["--workers", "1", "build", "--corpus", "corpus.jsonl", "--lang", "en", "--out", "wh1.jsonl"]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
    assert_eq!(fs::read(d.join("wh.jsonl")).unwrap(), fs::read(d.join("wh1.jsonl")).unwrap());

    let o = whintent(d, &["eval", "--data", "wh.jsonl", "--report", "report.json", "--predictions", "pred.jsonl", "--table"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&d.join("report.json"));
    assert_eq!(report["n_instances"], 12);
    assert_eq!(report["failures"], 0);
    // each step names its own goal, so the baseline gets them all
    assert_eq!(report["accuracy"], 1.0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("1.000"));
    assert_eq!(fs::read_to_string(d.join("pred.jsonl")).unwrap().lines().count(), 12);
}

#[test]
fn significance_reads_plain_and_wrapped_lists() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("plain.json"), "[0.91, 0.93, 0.92, 0.94, 0.90]").unwrap();
    fs::write(d.join("wrapped.json"), r#"{"accuracies": [0.91, 0.93, 0.92, 0.94, 0.90]}"#).unwrap();
    let a = whintent(d, &["significance", "--runs", "plain.json", "--baseline", "0.5", "--out", "sig.json"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let b = whintent(d, &["significance", "--runs", "wrapped.json", "--baseline", "0.5"]);
    assert_eq!(a.stdout, b.stdout);
    let sig = read_json(&d.join("sig.json"));
    assert_eq!(sig["significant"], true);
    assert_eq!(sig["degrees_of_freedom"], 4);

    fs::write(d.join("one.json"), "[0.9]").unwrap();
    let bad = whintent(d, &["significance", "--runs", "one.json", "--baseline", "0.5"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn opendomain_with_one_hot_embedder() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_corpus(d);
    let o = whintent(
        d,
        &[
            "opendomain", "--corpus", "corpus.jsonl", "--lang", "en", "--holdout", "6", "--candidates", "5",
            "--embedder", "onehot", "--report", "od.json", "--instances-out", "inst.jsonl",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&d.join("od.json"));
    assert_eq!(r["instances"], 6);
    assert_eq!(r["mrr"], 1.0);
    for l in fs::read_to_string(d.join("inst.jsonl")).unwrap().lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        let c = v["candidate_goals"].as_array().unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.contains(&v["gold_goal"]));
    }
}

#[test]
fn usage_and_input_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&whintent(d, &["--help"])), 0);
    assert_eq!(code(&whintent(d, &["no-such-command"])), 1);
    assert_eq!(code(&whintent(d, &["build", "--lang", "en"])), 1);
    let o = whintent(d, &["build", "--corpus", "missing.jsonl", "--lang", "en", "--out", "x.jsonl"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("missing.jsonl"), "{}", stderr(&o));
    write_corpus(d);
    assert_eq!(code(&whintent(d, &["--workers", "0", "build", "--corpus", "corpus.jsonl", "--lang", "en", "--out", "x.jsonl"])), 1);
    fs::write(d.join("bad.jsonl"), "{\"id\":\"q\",\"context\":\"c\",\"candidates\":[\"a\"],\"label\":3}\n").unwrap();
    assert_eq!(code(&whintent(d, &["eval", "--data", "bad.jsonl", "--report", "r.json"])), 1);
}

fn write_mcq(d: &Path) {
    let mut s = String::new();
    for i in 0..5 {
        let line = json!({"id": format!("q{i}"), "context": format!("set alarm {i}"), "candidates": ["Set Alarm", "Check Weather", "Play Music"], "label": 0});
        s.push_str(&line.to_string());
        s.push('\n');
    }
    fs::write(d.join("mcq.jsonl"), s).unwrap();
}

#[test]
fn external_scorer_served_by_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_mcq(d);
    let cmd = format!("{} serve --lang en --fit mcq.jsonl", env!("CARGO_BIN_EXE_whintent"));
    let o = whintent(
        d,
        &[
            "eval", "--data", "mcq.jsonl", "--report", "ext.json", "--scorer", "external", "--scorer-cmd", &cmd,
            "--transcript", "session.log", "--train", "mcq.jsonl",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ext = read_json(&d.join("ext.json"));
    let local = whintent(d, &["eval", "--data", "mcq.jsonl", "--report", "local.json"]);
    assert_eq!(code(&local), 0);
    assert_eq!(ext["accuracy"], read_json(&d.join("local.json"))["accuracy"]);

    let check = whintent(d, &["check-transcript", "session.log"]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));
    let report: Value = serde_json::from_slice(&check.stdout).unwrap();
    assert_eq!(report["score_requests"], 5);
    assert_eq!(report["train_commands"], 1);
}

#[test]
fn misbehaving_scorer_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_mcq(d);
    // handshake, then one score per request whatever the candidate count
    fs::write(
        d.join("short.sh"),
        "echo '{\"protocol\":\"mcq-scorer\",\"version\":1}'\n\
         while read -r line; do\n\
           id=$(printf '%s' \"$line\" | sed 's/.*\"id\":\"\\([^\"]*\\)\".*/\\1/')\n\
           echo \"{\\\"id\\\":\\\"$id\\\",\\\"scores\\\":[1]}\"\n\
         done\n",
    )
    .unwrap();
    let o = whintent(
        d,
        &["eval", "--data", "mcq.jsonl", "--report", "r.json", "--scorer", "external", "--scorer-cmd", "sh short.sh", "--timeout-secs", "5"],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("3 candidates but 1 scores"), "{}", stderr(&o));
    // the report is still written, with every instance counted as a failure
    assert_eq!(read_json(&d.join("r.json"))["failures"], 5);

    fs::write(d.join("bad.log"), "< {\"protocol\":\"mcq-scorer\",\"version\":1}\n> {\"id\":\"a\",\"context\":\"c\",\"candidates\":[\"x\",\"y\"]}\n").unwrap();
    let check = whintent(d, &["check-transcript", "bad.log"]);
    assert_eq!(code(&check), 2);
}

/// A small benchmark in the FB layout: `root/es/{train,eval,test}-es.tsv`.
fn write_fb_es(root: &Path) {
    let labels = ["alarm/set_alarm", "alarm/cancel_alarm", "weather/find", "reminder/set_reminder"];
    let words = ["poner alarma", "cancelar alarma", "tiempo hoy", "recordatorio nuevo"];
    fs::create_dir_all(root.join("es")).unwrap();
    for (split, n) in [("train", 40), ("eval", 12), ("test", 8)] {
        let mut s = String::new();
        for i in 0..n {
            s.push_str(&format!("{}\t\tpor favor {}\tes\t{{}}\n", labels[i % 4], words[i % 4]));
        }
        fs::write(root.join(format!("es/{split}-es.tsv")), s).unwrap();
    }
}

#[test]
fn cast_and_curve_on_a_small_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_fb_es(&d.join("fb"));
    let o = whintent(d, &["cast", "--dataset", "fb_es", "--root", "fb", "--out-dir", "cast"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = read_json(&d.join("cast/fb_es.cast.json"));
    assert_eq!(doc["stats"]["train_size"], 40);
    assert_eq!(doc["stats"]["test_size"], 8);
    assert_eq!(fs::read_to_string(d.join("cast/fb_es_test.jsonl")).unwrap().lines().count(), 8);

    let o = whintent(
        d,
        &["curve", "--dataset", "fb_es", "--root", "fb", "--sizes", "4,20", "--repeats", "3", "--scorer", "random", "--out", "curve.json"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let c = read_json(&d.join("curve.json"));
    let points = c["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[1]["accuracies"].as_array().unwrap().len(), 3);

    let too_big = whintent(d, &["curve", "--dataset", "fb_es", "--root", "fb", "--sizes", "41", "--out", "x.json"]);
    assert_eq!(code(&too_big), 1);
}
