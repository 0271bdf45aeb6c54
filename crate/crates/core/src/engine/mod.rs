//! UCI engine client over child-process pipes.
//!
//! A session owns one engine process. Commands are strictly serialized: at
//! most one `go` is outstanding and it is always drained to its `bestmove`
//! before anything else is sent. Every line in either direction is kept in a
//! transcript so the ordering can be audited afterwards.

pub mod protocol;

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::chess::{emit_fen, parse_uci_move, Move, Position};
pub use protocol::{normalize_score, parse_bestmove, parse_info, InfoLine, NormalizedScore, ScoreError, ScoreKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EngineConfig {
    pub executable_path: PathBuf,
    /// Extra command-line arguments for the engine process.
    pub args: Vec<String>,
    pub depth_limit: Option<u32>,
    pub time_limit_ms: Option<u64>,
    pub multipv: u32,
    pub threads: u32,
    pub hash_mb: u32,
    pub options: Vec<(String, String)>,
    #[serde(skip)]
    pub handshake_timeout: Duration,
    /// Upper bound on a single search; defaults to generous slack over the
    /// time limit, or ten minutes for depth-only searches.
    #[serde(skip)]
    pub search_timeout: Option<Duration>,
}

impl EngineConfig {
    /// Reproduction defaults: depth 20, four lines, one thread, 256 MB hash.
    pub fn new(executable_path: impl Into<PathBuf>) -> EngineConfig {
        EngineConfig {
            executable_path: executable_path.into(),
            args: Vec::new(),
            depth_limit: Some(20),
            time_limit_ms: None,
            multipv: 4,
            threads: 1,
            hash_mb: 256,
            options: Vec::new(),
            handshake_timeout: Duration::from_secs(10),
            search_timeout: None,
        }
    }

    pub fn limits(&self) -> Limits {
        Limits {
            depth: self.depth_limit,
            movetime_ms: self.time_limit_ms,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.depth_limit.is_none() && self.time_limit_ms.is_none() {
            return Err(EngineError::Config("a depth or time limit is required".into()));
        }
        if self.multipv == 0 {
            return Err(EngineError::Config("multipv must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(EngineError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// Search limits for one `go`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Limits {
    pub depth: Option<u32>,
    pub movetime_ms: Option<u64>,
}

impl Limits {
    pub fn depth(d: u32) -> Limits {
        Limits {
            depth: Some(d),
            movetime_ms: None,
        }
    }

    fn go_command(&self) -> String {
        let mut cmd = String::from("go");
        if let Some(d) = self.depth {
            cmd.push_str(&format!(" depth {d}"));
        }
        if let Some(t) = self.movetime_ms {
            cmd.push_str(&format!(" movetime {t}"));
        }
        cmd
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error("cannot start engine '{path}': {source}")]
    Spawn {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("engine pipe closed while {during}\n{excerpt}")]
    BrokenPipe { during: String, excerpt: String },
    #[error("engine did not answer within {waited:?} while {during}\n{excerpt}")]
    Timeout {
        during: String,
        waited: Duration,
        excerpt: String,
    },
    #[error("engine protocol error: {message}\n{excerpt}")]
    Protocol { message: String, excerpt: String },
    #[error("position has no legal moves")]
    NoLegalMoves,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptLine {
    pub direction: Direction,
    pub text: String,
}

/// True when every `go` in the transcript is answered by exactly one
/// `bestmove` before the next command is sent.
pub fn transcript_is_serialized(transcript: &[TranscriptLine]) -> bool {
    let mut searching = false;
    for line in transcript {
        match line.direction {
            Direction::Sent => {
                if searching {
                    return false;
                }
                searching = line.text.starts_with("go");
            }
            Direction::Received => {
                if parse_bestmove(&line.text).is_some() || line.text.trim() == "bestmove" {
                    if !searching {
                        return false;
                    }
                    searching = false;
                }
            }
        }
    }
    !searching
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EngineLine {
    pub rank: u32,
    #[serde(rename = "move")]
    pub mv: Move,
    pub score: NormalizedScore,
    pub pv: Vec<Move>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EngineEvaluation {
    #[serde(serialize_with = "fen_of")]
    pub position: Position,
    pub lines: Vec<EngineLine>,
    pub depth_reached: u32,
    pub engine_id: String,
}

fn fen_of<S: Serializer>(pos: &Position, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&emit_fen(pos))
}

impl EngineEvaluation {
    pub fn best(&self) -> &EngineLine {
        &self.lines[0]
    }
}

const EXCERPT_LINES: usize = 12;
const MAX_CHATTER: usize = 200;

pub struct EngineSession {
    config: EngineConfig,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    transcript: Vec<TranscriptLine>,
    engine_id: String,
    advertised: Vec<String>,
}

/// Spawns the engine and completes the UCI handshake.
pub fn start_engine(cfg: &EngineConfig) -> Result<EngineSession, EngineError> {
    cfg.validate()?;
    let mut child = Command::new(&cfg.executable_path)
        .args(&cfg.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|source| EngineError::Spawn {
            path: cfg.executable_path.clone(),
            source,
        })?;
    let stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    thread::Builder::new()
        .name("uci-reader".into())
        .spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        })
        .expect("spawn reader thread");

    let mut session = EngineSession {
        config: cfg.clone(),
        stdin: child.stdin.take(),
        child,
        lines: rx,
        transcript: Vec::new(),
        engine_id: String::new(),
        advertised: Vec::new(),
    };
    session.handshake()?;
    Ok(session)
}

impl EngineSession {
    pub fn engine_id(&self) -> &str {
        &self.engine_id
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn transcript(&self) -> &[TranscriptLine] {
        &self.transcript
    }

    fn excerpt(&self) -> String {
        let start = self.transcript.len().saturating_sub(EXCERPT_LINES);
        self.transcript[start..]
            .iter()
            .map(|l| match l.direction {
                Direction::Sent => format!("  > {}", l.text),
                Direction::Received => format!("  < {}", l.text),
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn protocol_error(&self, message: impl Into<String>) -> EngineError {
        EngineError::Protocol {
            message: message.into(),
            excerpt: self.excerpt(),
        }
    }

    fn send(&mut self, command: &str) -> Result<(), EngineError> {
        log::debug!("> {command}");
        self.transcript.push(TranscriptLine {
            direction: Direction::Sent,
            text: command.to_string(),
        });
        let result = match self.stdin.as_mut() {
            Some(stdin) => writeln!(stdin, "{command}").and_then(|_| stdin.flush()),
            None => Err(std::io::ErrorKind::BrokenPipe.into()),
        };
        result.map_err(|_| EngineError::BrokenPipe {
            during: format!("sending '{command}'"),
            excerpt: self.excerpt(),
        })
    }

    fn recv(&mut self, deadline: Instant, during: &str) -> Result<String, EngineError> {
        let wait = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(wait) {
            Ok(line) => {
                log::trace!("< {line}");
                self.transcript.push(TranscriptLine {
                    direction: Direction::Received,
                    text: line.clone(),
                });
                Ok(line)
            }
            Err(RecvTimeoutError::Timeout) => Err(EngineError::Timeout {
                during: during.to_string(),
                waited: wait,
                excerpt: self.excerpt(),
            }),
            Err(RecvTimeoutError::Disconnected) => Err(EngineError::BrokenPipe {
                during: during.to_string(),
                excerpt: self.excerpt(),
            }),
        }
    }

    fn handshake(&mut self) -> Result<(), EngineError> {
        // A program that exits at once may close stdin before `uci` is
        // written; what it printed still tells us why, so read it first.
        let sent = self.send("uci");
        let deadline = Instant::now() + self.config.handshake_timeout;
        let mut chatter = 0;
        loop {
            let line = match self.recv(deadline, "waiting for uciok") {
                Ok(line) => line,
                // an engine that talked but never said uciok is not speaking UCI
                Err(EngineError::BrokenPipe { .. } | EngineError::Timeout { .. }) if chatter > 0 => {
                    return Err(self.protocol_error("no uciok; output does not look like UCI"));
                }
                Err(e) => return Err(sent.err().unwrap_or(e)),
            };
            let trimmed = line.trim();
            if trimmed == "uciok" {
                break;
            } else if let Some(name) = trimmed.strip_prefix("id name ") {
                self.engine_id = name.trim().to_string();
            } else if let Some(rest) = trimmed.strip_prefix("option name ") {
                let name = rest.split(" type ").next().unwrap_or(rest).trim();
                self.advertised.push(name.to_ascii_lowercase());
            } else if trimmed.starts_with("id ") || trimmed.is_empty() {
            } else {
                // banners are common; a flood of them is not
                chatter += 1;
                if chatter > MAX_CHATTER {
                    return Err(self.protocol_error("too much non-UCI output before uciok"));
                }
            }
        }
        let mut options: Vec<(String, String)> = vec![
            ("Threads".into(), self.config.threads.to_string()),
            ("Hash".into(), self.config.hash_mb.to_string()),
            ("MultiPV".into(), self.config.multipv.to_string()),
        ];
        options.extend(self.config.options.iter().cloned());
        for (name, value) in options {
            if self.advertised.contains(&name.to_ascii_lowercase()) {
                self.send(&format!("setoption name {name} value {value}"))?;
            } else {
                log::warn!("engine does not advertise option '{name}'; not sent");
            }
        }
        self.sync("waiting for readyok after handshake")
    }

    fn sync(&mut self, during: &str) -> Result<(), EngineError> {
        self.send("isready")?;
        let deadline = Instant::now() + self.config.handshake_timeout;
        while self.recv(deadline, during)?.trim() != "readyok" {}
        Ok(())
    }

    /// Clears engine state between games (`ucinewgame`).
    pub fn new_game(&mut self) -> Result<(), EngineError> {
        self.send("ucinewgame")?;
        self.sync("waiting for readyok after ucinewgame")
    }

    fn search_deadline(&self, limits: &Limits) -> Instant {
        let budget = self.config.search_timeout.unwrap_or_else(|| match limits.movetime_ms {
            Some(ms) => Duration::from_millis(ms * 3) + Duration::from_secs(30),
            None => Duration::from_secs(600),
        });
        Instant::now() + budget
    }

    /// Runs one search and returns the final line per multipv rank plus the
    /// deepest depth seen and the bestmove token.
    fn run_search(
        &mut self,
        pos: &Position,
        go: String,
        limits: &Limits,
    ) -> Result<(BTreeMap<u32, InfoLine>, u32, String), EngineError> {
        self.send(&format!("position fen {}", emit_fen(pos)))?;
        self.send(&go)?;
        let deadline = self.search_deadline(limits);
        let mut by_rank: BTreeMap<u32, InfoLine> = BTreeMap::new();
        let mut depth_reached = 0;
        loop {
            let line = self.recv(deadline, "waiting for bestmove")?;
            if let Some(best) = parse_bestmove(&line) {
                return Ok((by_rank, depth_reached, best.to_string()));
            }
            match parse_info(&line) {
                Ok(Some(info)) => {
                    if let Some(d) = info.depth {
                        depth_reached = depth_reached.max(d);
                    }
                    if info.score.is_some() && !info.pv.is_empty() && !info.bound {
                        by_rank.insert(info.multipv, info);
                    }
                }
                Ok(None) => {}
                Err(message) => {
                    // drain to bestmove so the session stays usable
                    let _ = self.drain_to_bestmove(deadline);
                    return Err(self.protocol_error(format!("unparseable info line: {message}")));
                }
            }
        }
    }

    fn drain_to_bestmove(&mut self, deadline: Instant) -> Result<(), EngineError> {
        loop {
            if parse_bestmove(&self.recv(deadline, "draining to bestmove")?).is_some() {
                return Ok(());
            }
        }
    }

    fn to_line(&self, pos: &Position, rank: u32, info: &InfoLine) -> Result<EngineLine, EngineError> {
        let raw = info.score.as_deref().expect("scored line");
        let score = normalize_score(raw, pos.side_to_move()).map_err(|e| self.protocol_error(e.to_string()))?;
        let mut pv = Vec::with_capacity(info.pv.len());
        let mut cur = *pos;
        for token in &info.pv {
            match parse_uci_move(&cur, token) {
                Some(m) => {
                    pv.push(m);
                    cur = cur.play_unchecked(&m);
                }
                None if pv.is_empty() => {
                    return Err(self.protocol_error(format!("pv move '{token}' is illegal")));
                }
                None => {
                    log::warn!("pv truncated at illegal move '{token}'");
                    break;
                }
            }
        }
        Ok(EngineLine {
            rank,
            mv: pv[0],
            score,
            pv,
        })
    }

    /// Ranked best lines for `pos`, scores from white's point of view.
    pub fn evaluate_position(&mut self, pos: &Position, limits: &Limits) -> Result<EngineEvaluation, EngineError> {
        if !pos.has_legal_move() {
            return Err(EngineError::NoLegalMoves);
        }
        let (by_rank, depth_reached, best) = self.run_search(pos, limits.go_command(), limits)?;
        let mut lines = Vec::with_capacity(by_rank.len());
        for (rank, info) in &by_rank {
            lines.push(self.to_line(pos, *rank, info)?);
        }
        let Some(best_idx) = lines.iter().position(|l| l.mv.to_uci() == best) else {
            return Err(self.protocol_error(format!("bestmove {best} is not among the reported lines")));
        };
        if best_idx != 0 {
            let line = lines.remove(best_idx);
            lines.insert(0, line);
        }
        for (i, line) in lines.iter_mut().enumerate() {
            line.rank = i as u32 + 1;
        }
        Ok(EngineEvaluation {
            position: *pos,
            lines,
            depth_reached,
            engine_id: self.engine_id.clone(),
        })
    }

    /// Score of `m` alone (`go ... searchmoves m`), white's point of view.
    pub fn evaluate_move(&mut self, pos: &Position, m: &Move, limits: &Limits) -> Result<NormalizedScore, EngineError> {
        if !pos.is_legal(m) {
            return Err(self.protocol_error(format!("{} is not legal here", m.to_uci())));
        }
        let uci = m.to_uci();
        let go = format!("{} searchmoves {uci}", limits.go_command());
        let (by_rank, _, best) = self.run_search(pos, go, limits)?;
        if best != uci {
            return Err(self.protocol_error(format!("searchmoves {uci} answered with bestmove {best}")));
        }
        let info = by_rank
            .values()
            .find(|info| info.pv.first() == Some(&uci))
            .ok_or_else(|| self.protocol_error(format!("no scored line for {uci}")))?;
        Ok(self.to_line(pos, 1, info)?.score)
    }

    /// Sends `quit` and waits briefly for the process to exit.
    pub fn quit(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if self.stdin.is_some() {
            let _ = self.send("quit");
            self.stdin = None;
        }
        let deadline = Instant::now() + Duration::from_millis(500);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for EngineSession {
    fn drop(&mut self) {
        self.shutdown();
    }
}
