//! A stand-in for the real corpus games: one short synthetic game per
//! corpus link, each with a Karpov sacrifice of the row's kind, and a fake
//! engine script that scores every sacrifice at its recorded loss.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use sacscore::chess::{parse_fen, parse_san, Color};
use sacscore::corpus::{load_corpus, CorpusEntry};
use sacscore::sacrifice::Bucket;

pub const FAKE: &str = env!("CARGO_BIN_EXE_fake-uci");

/// White to move; Qd8+ gives the queen for nothing, Re8+ then the rook.
const BOTH: &str = "r5k1/5ppp/8/8/8/8/5PPP/3QR1K1";
const QUEEN_ONLY: &str = "r5k1/5ppp/8/8/8/8/5PPP/3Q2K1";
const ROOK_ONLY: &str = "r5k1/5ppp/8/8/8/8/5PPP/4R1K1";

/// Squares for one extra pawn per side, so that no two games share a
/// position. White pawns stay on ranks 2-4 and black ones on 6-7, so they
/// never meet.
const WHITE_PAWNS: [&str; 8] = ["a2", "b2", "c2", "a3", "b3", "c3", "a4", "b4"];
const BLACK_PAWNS: [&str; 4] = ["a7", "b7", "c7", "b6"];

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub pgn_dir: PathBuf,
    pub script: PathBuf,
    pub games: usize,
}

/// Colour-swapped, rank-mirrored placement.
pub fn mirror_board(board: &str) -> String {
    board
        .split('/')
        .rev()
        .map(|rank| {
            rank.chars()
                .map(|c| if c.is_ascii_uppercase() { c.to_ascii_lowercase() } else { c.to_ascii_uppercase() })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("/")
}

/// Rank digits flipped: the same SAN move for the mirrored position.
pub fn mirror_san(san: &str) -> String {
    san.chars()
        .map(|c| match c.to_digit(10) {
            Some(d @ 1..=8) => char::from_digit(9 - d, 10).unwrap(),
            _ => c,
        })
        .collect()
}

fn put(board: &str, square: &str, piece: char) -> String {
    let mut grid: Vec<Vec<char>> = board
        .split('/')
        .map(|rank| {
            rank.chars()
                .flat_map(|c| match c.to_digit(10) {
                    Some(n) => vec!['.'; n as usize],
                    None => vec![c],
                })
                .collect()
        })
        .collect();
    let file = (square.as_bytes()[0] - b'a') as usize;
    let rank = (square.as_bytes()[1] - b'1') as usize;
    assert_eq!(grid[7 - rank][file], '.', "{square} occupied");
    grid[7 - rank][file] = piece;
    grid.iter()
        .map(|row| {
            let mut out = String::new();
            let mut run = 0;
            for &c in row {
                if c == '.' {
                    run += 1;
                } else {
                    if run > 0 {
                        out.push_str(&run.to_string());
                        run = 0;
                    }
                    out.push(c);
                }
            }
            if run > 0 {
                out.push_str(&run.to_string());
            }
            out
        })
        .collect::<Vec<_>>()
        .join("/")
}

struct Sac {
    /// Index into the game's SAN list.
    ply: usize,
    loss_cp: Option<i32>,
}

fn players(entry: &CorpusEntry) -> (&'static str, &'static str) {
    entry.label.split_once(" vs ").expect("labels read 'A vs B'")
}

/// Writes one PGN per distinct link into a fresh directory, plus the engine
/// script. Entries sharing a link share a game holding both sacrifices.
pub fn build() -> Fixture {
    let entries = load_corpus();
    let mut by_link: BTreeMap<&str, Vec<&CorpusEntry>> = BTreeMap::new();
    for e in &entries {
        by_link.entry(e.link_token()).or_default().push(e);
    }
    // keep corpus order for file names
    let mut links: Vec<&str> = Vec::new();
    for e in &entries {
        if !links.contains(&e.link_token()) {
            links.push(e.link_token());
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let pgn_dir = dir.path().join("games");
    std::fs::create_dir(&pgn_dir).unwrap();
    let mut positions: Vec<Value> = Vec::new();

    for (i, link) in links.iter().enumerate() {
        let group = &by_link[link];
        let queen = group.iter().find(|e| e.bucket == Bucket::Queen);
        let rook = group.iter().find(|e| e.bucket == Bucket::RookOrKnight);
        let (base, sans, sacs): (&str, Vec<&str>, Vec<Sac>) = match (queen, rook) {
            (Some(q), Some(r)) => (
                BOTH,
                vec!["Qd8+", "Rxd8", "Re8+", "Rxe8"],
                vec![Sac { ply: 0, loss_cp: q.recorded_loss_cp }, Sac { ply: 2, loss_cp: r.recorded_loss_cp }],
            ),
            (Some(q), None) => (QUEEN_ONLY, vec!["Qd8+", "Rxd8"], vec![Sac { ply: 0, loss_cp: q.recorded_loss_cp }]),
            (None, Some(r)) => (ROOK_ONLY, vec!["Re8+", "Rxe8"], vec![Sac { ply: 0, loss_cp: r.recorded_loss_cp }]),
            (None, None) => unreachable!(),
        };
        let first = group[0];
        let karpov = first.karpov_color();
        let board = put(&put(base, WHITE_PAWNS[i % 8], 'P'), BLACK_PAWNS[i / 8], 'p');
        let (board, sans): (String, Vec<String>) = match karpov {
            Color::White => (board, sans.iter().map(|s| s.to_string()).collect()),
            Color::Black => (mirror_board(&board), sans.iter().map(|s| mirror_san(s)).collect()),
        };
        let stm = if karpov == Color::White { "w" } else { "b" };
        let fullmove = 18 + 3 * i;
        let fen = format!("{board} {stm} - - 0 {fullmove}");

        // replay to find the scripted positions and moves
        let mut pos = parse_fen(&fen).unwrap();
        let mut fens = Vec::new();
        let mut ucis = Vec::new();
        for san in &sans {
            let m = parse_san(&pos, san).unwrap_or_else(|e| panic!("{fen} {san}: {e}"));
            fens.push(sacscore::chess::emit_fen(&pos));
            ucis.push(m.to_uci());
            pos = pos.apply_move(&m).unwrap();
        }
        let quiet = if karpov == Color::White { "g1h1" } else { "g8h8" };
        for sac in &sacs {
            let played = &ucis[sac.ply];
            let entry = match sac.loss_cp {
                None => json!({
                    "fen": fens[sac.ply],
                    "lines": [{"cp": 150, "pv": [played]}],
                }),
                Some(loss) => json!({
                    "fen": fens[sac.ply],
                    "lines": [{"cp": 150, "pv": [quiet]}, {"cp": 150 - loss, "pv": [played]}],
                    "searchmoves": {played.as_str(): {"cp": 150 - loss}},
                }),
            };
            positions.push(entry);
        }

        let (white, black) = players(group.iter().find(|e| e.bucket == Bucket::RookOrKnight).unwrap_or(&first));
        let mut movetext = String::new();
        let mut number = fullmove;
        for (k, san) in sans.iter().enumerate() {
            let white_moves = (karpov == Color::White) == (k % 2 == 0);
            if white_moves {
                movetext.push_str(&format!("{number}. {san} "));
            } else {
                if k == 0 {
                    movetext.push_str(&format!("{number}... "));
                }
                movetext.push_str(&format!("{san} "));
                number += 1;
            }
        }
        let year = group.iter().find_map(|e| e.year).unwrap_or(1980);
        let pgn = format!(
            "[Event \"Synthetic {i}\"]\n[Site \"{url}\"]\n[Date \"{year}.01.01\"]\n[White \"{white}\"]\n[Black \"{black}\"]\n\
             [Result \"*\"]\n[FEN \"{fen}\"]\n[SetUp \"1\"]\n\n{movetext}*\n",
            url = first.source_url,
        );
        std::fs::write(pgn_dir.join(format!("{i:02}.pgn")), pgn).unwrap();
    }

    let script = dir.path().join("script.json");
    let doc = json!({"id_name": "FixtureFish 2", "default_cp": 0, "positions": positions});
    std::fs::write(&script, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    Fixture {
        games: links.len(),
        dir,
        pgn_dir,
        script,
    }
}

pub fn script_args(script: &Path) -> Vec<String> {
    vec!["--engine-arg=--script".into(), format!("--engine-arg={}", script.display())]
}
