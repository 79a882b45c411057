//! Line-delimited JSON protocol between the evaluator and a scorer process.
//!
//! The scorer speaks first with a handshake line
//! `{"protocol":"mcq-scorer","version":1}`. After that every line from the
//! client is either a score request
//! `{"id":"x1","context":"...","candidates":["a","b"]}` or a training
//! command `{"id":"t1","command":"train","name":"wikihow","path":"wh.jsonl"}`,
//! and the scorer answers each with a line carrying the same id:
//! `{"id":"x1","scores":[0.3,1.2]}`, `{"id":"t1","ok":true}` or
//! `{"id":"x1","error":"..."}`. Responses are matched by id, not position.
//! One UTF-8 JSON object per line, never pretty-printed.
//!
//! A transcript of a session is the sequence of lines prefixed by `> ` (to
//! the scorer) or `< ` (from the scorer); [`validate_transcript`] checks one.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{ScoreRequest, Scorer, TrainPhase};
use crate::mcq::read_mcq;

pub const PROTOCOL_NAME: &str = "mcq-scorer";
pub const PROTOCOL_VERSION: u32 = 1;

pub const TO_SCORER: &str = "> ";
pub const FROM_SCORER: &str = "< ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handshake {
    pub protocol: String,
    pub version: u32,
}

impl Handshake {
    pub fn current() -> Self {
        Self {
            protocol: PROTOCOL_NAME.to_string(),
            version: PROTOCOL_VERSION,
        }
    }

    pub fn is_current(&self) -> bool {
        self.protocol == PROTOCOL_NAME && self.version == PROTOCOL_VERSION
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainCommand {
    pub id: String,
    pub command: String,
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClientMessage {
    Train(TrainCommand),
    Score(ScoreRequest),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ServerMessage {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

fn write_line<T: Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(io::Error::other)?;
    out.write_all(b"\n")?;
    out.flush()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ServeStats {
    pub requests: usize,
    pub errors: usize,
    pub trained_phases: usize,
}

/// Serves `scorer` over a line stream until the input closes.
pub fn serve(scorer: &mut dyn Scorer, input: impl BufRead, output: &mut dyn Write) -> io::Result<ServeStats> {
    let mut stats = ServeStats::default();
    write_line(output, &Handshake::current())?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.requests += 1;
        let reply = handle_line(scorer, &line, &mut stats);
        if reply.error.is_some() {
            stats.errors += 1;
        }
        write_line(output, &reply)?;
    }
    Ok(stats)
}

fn handle_line(scorer: &mut dyn Scorer, line: &str, stats: &mut ServeStats) -> ServerMessage {
    let error = |id: String, e: String| ServerMessage {
        id,
        error: Some(e),
        ..Default::default()
    };
    let value: serde_json::Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return error(String::new(), format!("unparseable request: {e}")),
    };
    let id = value.get("id").and_then(|v| v.as_str()).unwrap_or_default().to_string();
    match serde_json::from_value::<ClientMessage>(value) {
        Ok(ClientMessage::Score(req)) => {
            if let Err(e) = req.validate() {
                return error(id, e.to_string());
            }
            match scorer.score(&req) {
                Ok(s) => ServerMessage {
                    id,
                    scores: Some(s.scores),
                    ..Default::default()
                },
                Err(e) => error(id, e.to_string()),
            }
        }
        Ok(ClientMessage::Train(cmd)) if cmd.command == "train" => {
            let records = match std::fs::File::open(&cmd.path)
                .map_err(|e| e.to_string())
                .and_then(|f| read_mcq(io::BufReader::new(f)).map_err(|e| e.to_string()))
            {
                Ok(r) => r,
                Err(e) => return error(id, format!("cannot read {}: {e}", cmd.path.display())),
            };
            let phase = TrainPhase {
                name: cmd.name,
                source: Some(cmd.path),
                records,
            };
            match scorer.train(&phase) {
                Ok(()) => {
                    stats.trained_phases += 1;
                    ServerMessage {
                        id,
                        ok: Some(true),
                        detail: Some(serde_json::json!({ "records": phase.records.len() })),
                        ..Default::default()
                    }
                }
                Err(e) => error(id, e.to_string()),
            }
        }
        Ok(ClientMessage::Train(cmd)) => error(id, format!("unknown command `{}`", cmd.command)),
        Err(e) => error(id, format!("malformed request: {e}")),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TranscriptReport {
    pub score_requests: usize,
    pub train_commands: usize,
    pub responses: usize,
    pub error_responses: usize,
    pub violations: Vec<String>,
}

impl TranscriptReport {
    pub fn is_conformant(&self) -> bool {
        self.violations.is_empty()
    }
}

enum Pending {
    Score(usize),
    Train,
}

/// Checks a recorded session against the protocol.
pub fn validate_transcript(reader: impl BufRead) -> io::Result<TranscriptReport> {
    let mut report = TranscriptReport::default();
    let mut pending: HashMap<String, Pending> = HashMap::new();
    let mut handshake_seen = false;

    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let n = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut violation = |msg: String| report.violations.push(format!("line {n}: {msg}"));
        if let Some(body) = line.strip_prefix(TO_SCORER) {
            match serde_json::from_str::<ClientMessage>(body) {
                Ok(ClientMessage::Score(req)) => {
                    report.score_requests += 1;
                    if let Err(e) = req.validate() {
                        violation(e.to_string());
                    }
                    if pending.insert(req.id.clone(), Pending::Score(req.candidates.len())).is_some() {
                        violation(format!("id `{}` reused while outstanding", req.id));
                    }
                }
                Ok(ClientMessage::Train(cmd)) => {
                    report.train_commands += 1;
                    if pending.insert(cmd.id.clone(), Pending::Train).is_some() {
                        violation(format!("id `{}` reused while outstanding", cmd.id));
                    }
                }
                Err(e) => violation(format!("malformed request ({e}): {body}")),
            }
        } else if let Some(body) = line.strip_prefix(FROM_SCORER) {
            if !handshake_seen {
                match serde_json::from_str::<Handshake>(body) {
                    Ok(h) if h.is_current() => handshake_seen = true,
                    _ => {
                        violation(format!("expected handshake {{\"protocol\":\"{PROTOCOL_NAME}\",\"version\":{PROTOCOL_VERSION}}}, got: {body}"));
                        handshake_seen = true;
                    }
                }
                continue;
            }
            let msg = match serde_json::from_str::<ServerMessage>(body) {
                Ok(m) => m,
                Err(e) => {
                    violation(format!("malformed response ({e}): {body}"));
                    continue;
                }
            };
            report.responses += 1;
            let Some(expected) = pending.remove(&msg.id) else {
                violation(format!("response id `{}` matches no outstanding request: {body}", msg.id));
                continue;
            };
            if msg.error.is_some() {
                report.error_responses += 1;
                continue;
            }
            match expected {
                Pending::Score(n_candidates) => match &msg.scores {
                    Some(s) if s.len() != n_candidates => violation(format!(
                        "{} scores for {n_candidates} candidates: {body}",
                        s.len()
                    )),
                    Some(s) if s.iter().any(|x| !x.is_finite()) => violation(format!("non-finite score: {body}")),
                    Some(_) => {}
                    None => violation(format!("score response without scores or error: {body}")),
                },
                Pending::Train => {
                    if msg.ok != Some(true) {
                        violation(format!("train response without ok or error: {body}"));
                    }
                }
            }
        } else {
            violation(format!("line lacks a direction prefix: {line}"));
        }
    }
    if !handshake_seen && (report.score_requests + report.train_commands) > 0 {
        report.violations.push("scorer never sent a handshake".into());
    }
    let mut unanswered: Vec<&String> = pending.keys().collect();
    unanswered.sort();
    for id in unanswered {
        report.violations.push(format!("request `{id}` never answered"));
    }
    Ok(report)
}
