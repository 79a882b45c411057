use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{ClientMessage, Handshake, ServerMessage, TrainCommand, FROM_SCORER, TO_SCORER};
use super::{CandidateScores, ScoreRequest, Scorer, ScorerError, TrainPhase};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Training can take far longer than scoring one request.
const TRAIN_TIMEOUT: Duration = Duration::from_secs(7 * 24 * 60 * 60);

type Transcript = Arc<Mutex<Box<dyn Write + Send>>>;

fn record(transcript: &Option<Transcript>, prefix: &str, line: &str) {
    if let Some(t) = transcript {
        if let Ok(mut w) = t.lock() {
            let _ = writeln!(w, "{prefix}{line}");
            let _ = w.flush();
        }
    }
}

/// One serial request/response channel to a scorer.
///
/// Requests are written in order; responses may arrive in any order and are
/// matched by id. A background thread reads lines so that waits can time out.
pub struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<io::Result<String>>,
    stash: HashMap<String, (String, ServerMessage)>,
    timeout: Duration,
    transcript: Option<Transcript>,
    child: Option<Child>,
    next_id: u64,
}

impl Connection {
    /// Wraps an already-open stream pair and waits for the handshake.
    pub fn from_streams(
        reader: impl Read + Send + 'static,
        writer: impl Write + Send + 'static,
        timeout: Duration,
        transcript: Option<Box<dyn Write + Send>>,
    ) -> Result<Self, ScorerError> {
        let transcript: Option<Transcript> = transcript.map(|t| Arc::new(Mutex::new(t)));
        let (tx, rx) = mpsc::channel();
        let reader_log = transcript.clone();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                if let Ok(l) = &line {
                    record(&reader_log, FROM_SCORER, l);
                }
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut conn = Connection {
            writer: Box::new(writer),
            lines: rx,
            stash: HashMap::new(),
            timeout,
            transcript,
            child: None,
            next_id: 0,
        };
        conn.handshake()?;
        Ok(conn)
    }

    /// Starts `program args..` and talks to it over stdin/stdout.
    pub fn spawn(
        program: &str,
        args: &[String],
        timeout: Duration,
        transcript: Option<Box<dyn Write + Send>>,
    ) -> Result<Self, ScorerError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        match Connection::from_streams(stdout, stdin, timeout, transcript) {
            Ok(mut conn) => {
                conn.child = Some(child);
                Ok(conn)
            }
            Err(e) => {
                let _ = child.kill();
                let _ = child.wait();
                Err(e)
            }
        }
    }

    pub fn connect_tcp(
        addr: impl ToSocketAddrs,
        timeout: Duration,
        transcript: Option<Box<dyn Write + Send>>,
    ) -> Result<Self, ScorerError> {
        let stream = TcpStream::connect(addr)?;
        let reader = stream.try_clone()?;
        Connection::from_streams(reader, stream, timeout, transcript)
    }

    fn next_line(&mut self, deadline: Instant, waiting_for: &str) -> Result<String, ScorerError> {
        let left = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(left) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(ScorerError::Io(e)),
            Err(RecvTimeoutError::Timeout) => Err(ScorerError::protocol(
                format!("timed out after {:?} waiting for {waiting_for}", self.timeout),
                None,
            )),
            Err(RecvTimeoutError::Disconnected) => Err(ScorerError::protocol(
                format!("scorer closed the connection while waiting for {waiting_for}"),
                None,
            )),
        }
    }

    fn handshake(&mut self) -> Result<(), ScorerError> {
        let deadline = Instant::now() + self.timeout;
        let line = loop {
            let l = self.next_line(deadline, "the handshake")?;
            if !l.trim().is_empty() {
                break l;
            }
        };
        match serde_json::from_str::<Handshake>(&line) {
            Ok(h) if h.is_current() => Ok(()),
            _ => Err(ScorerError::protocol(
                "expected handshake {\"protocol\":\"mcq-scorer\",\"version\":1}",
                Some(&line),
            )),
        }
    }

    fn send(&mut self, message: &ClientMessage) -> Result<(), ScorerError> {
        let line = serde_json::to_string(message).map_err(|e| ScorerError::Io(io::Error::other(e)))?;
        record(&self.transcript, TO_SCORER, &line);
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        Ok(())
    }

    /// Waits for the response to `id`, stashing responses to other ids that
    /// are still outstanding.
    fn await_id(&mut self, id: &str, outstanding: &HashSet<String>) -> Result<(String, ServerMessage), ScorerError> {
        if let Some(hit) = self.stash.remove(id) {
            return Ok(hit);
        }
        let deadline = Instant::now() + self.timeout;
        loop {
            let line = self.next_line(deadline, &format!("response `{id}`"))?;
            if line.trim().is_empty() {
                continue;
            }
            let msg: ServerMessage = serde_json::from_str(&line)
                .map_err(|e| ScorerError::protocol(format!("malformed response: {e}"), Some(&line)))?;
            if msg.id == id {
                return Ok((line, msg));
            }
            if outstanding.contains(&msg.id) && !self.stash.contains_key(&msg.id) {
                let key = msg.id.clone();
                self.stash.insert(key, (line, msg));
                continue;
            }
            return Err(ScorerError::protocol(
                format!("response id `{}` matches no outstanding request (waiting for `{id}`)", msg.id),
                Some(&line),
            ));
        }
    }

    fn to_scores(request: &ScoreRequest, line: &str, msg: ServerMessage) -> Result<CandidateScores, ScorerError> {
        if let Some(err) = msg.error {
            return Err(ScorerError::protocol(
                format!("scorer reported an error for `{}`: {err}", request.id),
                Some(line),
            ));
        }
        let Some(scores) = msg.scores else {
            return Err(ScorerError::protocol("response has neither scores nor error", Some(line)));
        };
        let out = CandidateScores { id: msg.id, scores };
        out.check(request).map_err(|e| match e {
            ScorerError::Protocol { message, .. } => ScorerError::protocol(message, Some(line)),
            other => other,
        })?;
        Ok(out)
    }

    /// Writes all requests, then collects one result per request in order.
    ///
    /// A result-level protocol error (wrong length, scorer-side error) only
    /// affects its own request; a stream-level failure (timeout, closed
    /// stream, stray id) fails every request still waiting.
    pub fn score_batch(&mut self, requests: &[ScoreRequest]) -> Vec<Result<CandidateScores, ScorerError>> {
        let mut outstanding = HashSet::new();
        for r in requests {
            if let Err(e) = self.send(&ClientMessage::Score(r.clone())) {
                let msg = e.to_string();
                return requests
                    .iter()
                    .map(|_| Err(ScorerError::protocol(format!("send failed: {msg}"), None)))
                    .collect();
            }
            outstanding.insert(r.id.clone());
        }
        let mut out = Vec::with_capacity(requests.len());
        let mut broken: Option<String> = None;
        for r in requests {
            if let Some(why) = &broken {
                out.push(Err(ScorerError::protocol(why.clone(), None)));
                continue;
            }
            match self.await_id(&r.id, &outstanding) {
                Ok((line, msg)) => {
                    outstanding.remove(&r.id);
                    out.push(Self::to_scores(r, &line, msg));
                }
                Err(e) => {
                    broken = Some(format!("connection failed earlier in the batch: {e}"));
                    out.push(Err(e));
                }
            }
        }
        out
    }

    pub fn score(&mut self, request: &ScoreRequest) -> Result<CandidateScores, ScorerError> {
        self.score_batch(std::slice::from_ref(request)).pop().expect("one result per request")
    }

    /// Asks the scorer to train on an MCQ file and waits for the outcome.
    pub fn train(&mut self, name: &str, path: &Path) -> Result<ServerMessage, ScorerError> {
        self.next_id += 1;
        let id = format!("train-{}", self.next_id);
        self.send(&ClientMessage::Train(TrainCommand {
            id: id.clone(),
            command: "train".into(),
            name: name.into(),
            path: path.to_path_buf(),
        }))?;
        let outstanding: HashSet<String> = [id.clone()].into();
        let saved = self.timeout;
        self.timeout = TRAIN_TIMEOUT;
        let res = self.await_id(&id, &outstanding);
        self.timeout = saved;
        let (line, msg) = res?;
        match (&msg.error, msg.ok) {
            (Some(err), _) => Err(ScorerError::Training {
                scorer: "external".into(),
                message: format!("{err} ({line})"),
            }),
            (None, Some(true)) => Ok(msg),
            _ => Err(ScorerError::protocol("train response without ok or error", Some(&line))),
        }
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(mut child) = self.child.take() {
            // Closing stdin lets a well-behaved scorer exit on its own.
            self.writer = Box::new(io::sink());
            let deadline = Instant::now() + Duration::from_secs(2);
            loop {
                match child.try_wait() {
                    Ok(Some(_)) => return,
                    Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(20)),
                    _ => break,
                }
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// [`Scorer`] backed by a [`Connection`]. Calls are serialised through a mutex.
pub struct ExternalScorer {
    name: String,
    conn: Mutex<Connection>,
}

impl ExternalScorer {
    pub fn new(name: impl Into<String>, conn: Connection) -> Self {
        Self {
            name: name.into(),
            conn: Mutex::new(conn),
        }
    }

    fn with_conn<R>(&self, f: impl FnOnce(&mut Connection) -> R) -> R {
        let mut guard = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut guard)
    }
}

impl Scorer for ExternalScorer {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn score(&self, request: &ScoreRequest) -> Result<CandidateScores, ScorerError> {
        self.with_conn(|c| c.score(request))
    }

    fn score_batch(&self, requests: &[ScoreRequest]) -> Vec<Result<CandidateScores, ScorerError>> {
        self.with_conn(|c| c.score_batch(requests))
    }

    fn train(&mut self, phase: &TrainPhase) -> Result<(), ScorerError> {
        let conn = self.conn.get_mut().unwrap_or_else(|p| p.into_inner());
        match &phase.source {
            Some(path) => conn.train(&phase.name, path).map(|_| ()),
            None => {
                let mut tmp = tempfile::Builder::new().prefix("mcq-phase-").suffix(".jsonl").tempfile()?;
                crate::io::write_jsonl(&mut tmp, &phase.records)?;
                tmp.flush()?;
                conn.train(&phase.name, tmp.path()).map(|_| ())
            }
        }
    }
}
