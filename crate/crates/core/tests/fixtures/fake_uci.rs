//! Scripted UCI engine for tests.
//!
//! The script is JSON, found via `--script <path>`, the `FAKE_UCI_SCRIPT`
//! environment variable, or `setoption name Script value <path>`. Without a
//! script every legal move scores `default_cp` and lines come out in UCI
//! order. Scores in the script are from the side to move, as UCI reports them.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::Deserialize;

use sacscore::chess::{emit_fen, parse_fen_with, parse_uci_move, FenOptions, Position};

#[derive(Deserialize, Default, Clone, Copy)]
struct Score {
    cp: Option<i32>,
    mate: Option<i32>,
}

impl Score {
    fn token(&self) -> String {
        match (self.cp, self.mate) {
            (_, Some(m)) => format!("mate {m}"),
            (Some(cp), None) => format!("cp {cp}"),
            (None, None) => "cp 0".into(),
        }
    }
}

#[derive(Deserialize, Clone)]
struct Line {
    #[serde(flatten)]
    score: Score,
    pv: Vec<String>,
}

#[derive(Deserialize, Clone)]
struct Entry {
    fen: String,
    #[serde(default)]
    lines: Vec<Line>,
    #[serde(default)]
    searchmoves: BTreeMap<String, Score>,
}

#[derive(Deserialize, Default)]
struct Script {
    #[serde(default)]
    id_name: Option<String>,
    #[serde(default)]
    default_cp: i32,
    #[serde(default)]
    positions: Vec<Entry>,
    /// normal | exit_after_handshake | chatter | hang_on_go | garbage_info
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    bestmove_override: Option<String>,
}

fn load(path: &str) -> Script {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("script {path}: {e}"));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("script {path}: {e}"))
}

fn four_fields(fen: &str) -> String {
    fen.split_whitespace().take(4).collect::<Vec<_>>().join(" ")
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut script = match args.iter().position(|a| a == "--script") {
        Some(i) => load(&args[i + 1]),
        None => match std::env::var("FAKE_UCI_SCRIPT") {
            Ok(path) => load(&path),
            Err(_) => Script::default(),
        },
    };
    let mode = script.mode.clone().unwrap_or_default();
    if mode == "chatter" {
        // never speaks UCI
        for i in 0..5 {
            println!("hello there, line {i}");
        }
        return;
    }

    let stdin = io::stdin();
    let mut out = io::stdout();
    let mut pos = Position::startpos();
    let mut multipv = 1usize;

    println!("FakeFish test engine");
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            Some("uci") => {
                let name = script.id_name.clone().unwrap_or_else(|| "FakeFish 1.0".into());
                println!("id name {name}");
                println!("id author nobody");
                println!("option name Threads type spin default 1 min 1 max 512");
                println!("option name Hash type spin default 16 min 1 max 33554432");
                println!("option name MultiPV type spin default 1 min 1 max 500");
                println!("option name Script type string default <empty>");
                println!("uciok");
                if mode == "exit_after_handshake" {
                    out.flush().ok();
                    // answer the first isready, then vanish
                }
            }
            Some("isready") => {
                println!("readyok");
                if mode == "exit_after_handshake" {
                    out.flush().ok();
                    return;
                }
            }
            Some("setoption") => {
                let text = line.as_str();
                if let (Some(n), Some(v)) = (text.find("name "), text.find(" value ")) {
                    let name = text[n + 5..v].trim();
                    let value = text[v + 7..].trim();
                    match name {
                        "MultiPV" => multipv = value.parse().unwrap_or(1),
                        "Script" => script = load(value),
                        _ => {}
                    }
                }
            }
            Some("ucinewgame") => {}
            Some("position") => {
                let moves_at = tokens.iter().position(|t| *t == "moves");
                let head_end = moves_at.unwrap_or(tokens.len());
                pos = if tokens.get(1) == Some(&"startpos") {
                    Position::startpos()
                } else {
                    let fen = tokens[2..head_end].join(" ");
                    parse_fen_with(&fen, FenOptions { lenient: true }).expect("fen").0
                };
                if let Some(i) = moves_at {
                    for t in &tokens[i + 1..] {
                        let m = parse_uci_move(&pos, t).expect("legal move");
                        pos = pos.play_unchecked(&m);
                    }
                }
            }
            Some("go") => {
                if mode == "hang_on_go" {
                    continue;
                }
                let depth: u32 = tokens
                    .iter()
                    .position(|t| *t == "depth")
                    .and_then(|i| tokens.get(i + 1))
                    .and_then(|d| d.parse().ok())
                    .unwrap_or(10);
                let search: Vec<String> = match tokens.iter().position(|t| *t == "searchmoves") {
                    Some(i) => tokens[i + 1..].iter().map(|s| s.to_string()).collect(),
                    None => Vec::new(),
                };
                let lines = answer(&script, &pos, &search, multipv);
                println!("info string scripted answer");
                println!("info depth 1 currmove {} currmovenumber 1", lines[0].pv[0]);
                // a provisional bound that must not be taken as final
                println!("info depth {depth} multipv 1 score cp 9999 lowerbound nodes 10 pv {}", lines[0].pv[0]);
                if mode == "garbage_info" {
                    println!("info depth {depth} score banana pv {}", lines[0].pv[0]);
                }
                for (k, l) in lines.iter().enumerate() {
                    println!(
                        "info depth {depth} seldepth {depth} multipv {} score {} nodes 1000 nps 1000 time 1 pv {}",
                        k + 1,
                        l.score.token(),
                        l.pv.join(" ")
                    );
                }
                let best = script.bestmove_override.clone().unwrap_or_else(|| lines[0].pv[0].clone());
                println!("bestmove {best}");
            }
            Some("quit") => break,
            _ => {}
        }
        out.flush().ok();
    }
}

fn answer(script: &Script, pos: &Position, search: &[String], multipv: usize) -> Vec<Line> {
    let fen = emit_fen(pos);
    let entry = script
        .positions
        .iter()
        .find(|e| e.fen == fen)
        .or_else(|| script.positions.iter().find(|e| four_fields(&e.fen) == four_fields(&fen)));
    let default = Score {
        cp: Some(script.default_cp),
        mate: None,
    };

    if !search.is_empty() {
        return search
            .iter()
            .map(|mv| {
                let score = entry
                    .and_then(|e| {
                        e.searchmoves
                            .get(mv)
                            .copied()
                            .or_else(|| e.lines.iter().find(|l| &l.pv[0] == mv).map(|l| l.score))
                    })
                    .unwrap_or(default);
                Line {
                    score,
                    pv: vec![mv.clone()],
                }
            })
            .collect();
    }
    if let Some(e) = entry.filter(|e| !e.lines.is_empty()) {
        return e.lines.iter().take(multipv).cloned().collect();
    }
    let mut moves: Vec<String> = pos.legal_moves().iter().map(|m| m.to_uci()).collect();
    moves.sort();
    moves
        .into_iter()
        .take(multipv)
        .map(|m| Line {
            score: default,
            pv: vec![m],
        })
        .collect()
}
