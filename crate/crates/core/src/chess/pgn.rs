//! Portable Game Notation: tag pairs plus SAN movetext.
//!
//! Only the mainline is kept. Comments, NAGs, recursive variations and
//! `%` escape lines are skipped.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::fen::{emit_fen, parse_fen_with, FenError, FenOptions};
use super::position::{Position, RepetitionKey, Status};
use super::san::{parse_san, to_san, SanError};
use super::types::{Color, Move};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum GameResult {
    WhiteWins,
    BlackWins,
    Draw,
    Unknown,
}

impl GameResult {
    pub fn parse(token: &str) -> Option<GameResult> {
        Some(match token {
            "1-0" => GameResult::WhiteWins,
            "0-1" => GameResult::BlackWins,
            "1/2-1/2" | "½-½" => GameResult::Draw,
            "*" => GameResult::Unknown,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GameResult::WhiteWins => "1-0",
            GameResult::BlackWins => "0-1",
            GameResult::Draw => "1/2-1/2",
            GameResult::Unknown => "*",
        }
    }
}

impl fmt::Display for GameResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A mainline move with the SAN text it was recorded as.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayedMove {
    pub mv: Move,
    pub san: String,
}

/// How a replayed game ended on the board, if it did.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    Checkmate { winner: Color },
    Stalemate,
    InsufficientMaterial,
    ThreefoldRepetition,
    FiftyMoveRule,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRecord {
    tags: Vec<(String, String)>,
    start: Position,
    moves: Vec<PlayedMove>,
    result: GameResult,
}

impl GameRecord {
    /// Builds a record, checking that every move is legal in sequence.
    pub fn new(
        tags: Vec<(String, String)>,
        start: Position,
        moves: Vec<Move>,
        result: GameResult,
    ) -> Result<GameRecord, IllegalGameMove> {
        let mut pos = start;
        let mut played = Vec::with_capacity(moves.len());
        for (ply, mv) in moves.into_iter().enumerate() {
            if !pos.is_legal(&mv) {
                return Err(IllegalGameMove { ply, mv: mv.to_uci() });
            }
            played.push(PlayedMove {
                san: to_san(&pos, &mv),
                mv,
            });
            pos = pos.play_unchecked(&mv);
        }
        Ok(GameRecord {
            tags,
            start,
            moves: played,
            result,
        })
    }

    pub fn tags(&self) -> &[(String, String)] {
        &self.tags
    }

    pub fn tag(&self, key: &str) -> Option<&str> {
        self.tags
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn start_position(&self) -> &Position {
        &self.start
    }

    pub fn moves(&self) -> &[PlayedMove] {
        &self.moves
    }

    pub fn result(&self) -> GameResult {
        self.result
    }

    /// Short identifier built from the player and date tags.
    pub fn id(&self) -> String {
        let white = self.tag("White").unwrap_or("?");
        let black = self.tag("Black").unwrap_or("?");
        match self.tag("Date").and_then(|d| d.get(..4)).filter(|y| y.chars().all(|c| c.is_ascii_digit())) {
            Some(year) => format!("{white} - {black} ({year})"),
            None => format!("{white} - {black}"),
        }
    }

    /// Positions before each ply, followed by the final position.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let mut pos = self.start;
        out.push(pos);
        for pm in &self.moves {
            pos = pos.play_unchecked(&pm.mv);
            out.push(pos);
        }
        out
    }

    pub fn final_position(&self) -> Position {
        self.positions().pop().expect("at least the start position")
    }

    /// Replays the game and reports the first rule-based termination, if any.
    /// Repetition and the fifty-move rule are tracked over the move history.
    pub fn termination(&self) -> Option<Termination> {
        let mut seen: HashMap<RepetitionKey, u32> = HashMap::new();
        for pos in self.positions() {
            let count = seen.entry(pos.repetition_key()).or_insert(0);
            *count += 1;
            match pos.status() {
                Status::Checkmate { winner } => return Some(Termination::Checkmate { winner }),
                Status::Stalemate => return Some(Termination::Stalemate),
                Status::InsufficientMaterial => return Some(Termination::InsufficientMaterial),
                Status::Ongoing => {}
            }
            if *count >= 3 {
                return Some(Termination::ThreefoldRepetition);
            }
            if pos.halfmove_clock() >= 100 {
                return Some(Termination::FiftyMoveRule);
            }
        }
        None
    }

    /// Renders the record as PGN text.
    pub fn to_pgn(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.tags {
            out.push_str(&format!("[{k} \"{}\"]\n", v.replace('\\', "\\\\").replace('"', "\\\"")));
        }
        let has_fen = self.tag("FEN").is_some();
        if !has_fen && self.start != Position::startpos() {
            out.push_str("[SetUp \"1\"]\n");
            out.push_str(&format!("[FEN \"{}\"]\n", emit_fen(&self.start)));
        }
        out.push('\n');

        let mut tokens = Vec::with_capacity(self.moves.len() * 2);
        let mut number = self.start.fullmove_number();
        let mut color = self.start.side_to_move();
        for (i, pm) in self.moves.iter().enumerate() {
            if color == Color::White {
                tokens.push(format!("{number}."));
            } else if i == 0 {
                tokens.push(format!("{number}..."));
            }
            tokens.push(pm.san.clone());
            if color == Color::Black {
                number += 1;
            }
            color = !color;
        }
        tokens.push(self.result.to_string());

        let mut line_len = 0;
        for token in tokens {
            if line_len > 0 && line_len + 1 + token.len() > 79 {
                out.push('\n');
                line_len = 0;
            } else if line_len > 0 {
                out.push(' ');
                line_len += 1;
            }
            line_len += token.len();
            out.push_str(&token);
        }
        out.push('\n');
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("illegal move {mv} at ply {ply}")]
pub struct IllegalGameMove {
    pub ply: usize,
    pub mv: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PgnErrorKind {
    #[error("malformed tag pair: {0}")]
    Tag(String),
    #[error("bad FEN tag: {0}")]
    Fen(#[from] FenError),
    #[error(transparent)]
    San(#[from] SanError),
    #[error("unexpected token '{0}'")]
    Token(String),
    #[error("unterminated {0}")]
    Unterminated(&'static str),
}

/// Movetext error located by game index (0-based, file order) and ply.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("PGN game {game_index}, ply {ply}: {kind}")]
pub struct PgnError {
    pub game_index: usize,
    pub ply: usize,
    pub kind: PgnErrorKind,
}

#[derive(Debug)]
enum Token<'a> {
    Tag(&'a str),
    Symbol(&'a str),
    Result(GameResult),
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Token<'_>>, PgnErrorKind> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut line_start = true;
    while i < bytes.len() {
        let c = bytes[i];
        if line_start && c == b'%' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        line_start = c == b'\n';
        match c {
            b if b.is_ascii_whitespace() => i += 1,
            b'[' => {
                let mut j = i + 1;
                let mut in_str = false;
                while j < bytes.len() {
                    match bytes[j] {
                        b'\\' if in_str => j += 1,
                        b'"' => in_str = !in_str,
                        b']' if !in_str => break,
                        _ => {}
                    }
                    j += 1;
                }
                if j >= bytes.len() {
                    return Err(PgnErrorKind::Unterminated("tag pair"));
                }
                tokens.push(Token::Tag(&text[i + 1..j]));
                i = j + 1;
            }
            b'{' => {
                let end = text[i..].find('}').ok_or(PgnErrorKind::Unterminated("comment"))?;
                i += end + 1;
            }
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                tokens.push(Token::Open);
                i += 1;
            }
            b')' => {
                tokens.push(Token::Close);
                i += 1;
            }
            b'$' => {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !b"{}()[];$".contains(&bytes[i]) {
                    i += 1;
                }
                let word = &text[start..i];
                match GameResult::parse(word) {
                    Some(r) => tokens.push(Token::Result(r)),
                    None => tokens.push(Token::Symbol(word)),
                }
            }
        }
    }
    Ok(tokens)
}

fn parse_tag(body: &str) -> Result<(String, String), PgnErrorKind> {
    let body = body.trim();
    let (key, rest) = body
        .split_once(char::is_whitespace)
        .ok_or_else(|| PgnErrorKind::Tag(body.to_string()))?;
    let rest = rest.trim();
    if !(rest.len() >= 2 && rest.starts_with('"') && rest.ends_with('"')) {
        return Err(PgnErrorKind::Tag(body.to_string()));
    }
    let mut value = String::with_capacity(rest.len());
    let mut chars = rest[1..rest.len() - 1].chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                value.push(n);
            }
        } else {
            value.push(c);
        }
    }
    Ok((key.to_string(), value))
}

/// Strips move numbers (`12.`, `12...`) and inline glyphs; returns `None`
/// for tokens that carry no move.
fn move_text(word: &str) -> Option<&str> {
    let trimmed = word.trim_start_matches(|c: char| c.is_ascii_digit());
    let trimmed = trimmed.trim_start_matches('.');
    if trimmed.is_empty() {
        None
    } else if trimmed.len() == word.len() || word.contains('.') {
        Some(trimmed)
    } else {
        // digits without a dot: not a move number, keep as-is for the error
        Some(word)
    }
}

struct GameBuilder {
    tags: Vec<(String, String)>,
    start: Option<Position>,
    pos: Position,
    moves: Vec<PlayedMove>,
    depth: usize,
}

impl GameBuilder {
    fn new() -> GameBuilder {
        GameBuilder {
            tags: Vec::new(),
            start: None,
            pos: Position::startpos(),
            moves: Vec::new(),
            depth: 0,
        }
    }

    fn is_empty(&self) -> bool {
        self.tags.is_empty() && self.moves.is_empty()
    }

    fn finish(self, result: GameResult) -> GameRecord {
        let start = self.start.unwrap_or_default();
        let result = match result {
            GameResult::Unknown => self
                .tags
                .iter()
                .find(|(k, _)| k == "Result")
                .and_then(|(_, v)| GameResult::parse(v))
                .unwrap_or(GameResult::Unknown),
            r => r,
        };
        GameRecord {
            tags: self.tags,
            start,
            moves: self.moves,
            result,
        }
    }
}

/// Parses every game in a PGN text, in file order.
pub fn parse_pgn(text: &str) -> Result<Vec<GameRecord>, PgnError> {
    let tokens = tokenize(text).map_err(|kind| PgnError {
        game_index: 0,
        ply: 0,
        kind,
    })?;
    let mut games = Vec::new();
    let mut game = GameBuilder::new();
    let mut in_movetext = false;

    for token in tokens {
        let err = |game: &GameBuilder, games: &Vec<GameRecord>, kind| PgnError {
            game_index: games.len(),
            ply: game.moves.len(),
            kind,
        };
        match token {
            Token::Tag(body) => {
                if in_movetext && game.depth == 0 {
                    // A new header without a result token: close the previous game.
                    let done = std::mem::replace(&mut game, GameBuilder::new());
                    games.push(done.finish(GameResult::Unknown));
                    in_movetext = false;
                }
                let (key, value) = parse_tag(body).map_err(|k| err(&game, &games, k))?;
                if key == "FEN" {
                    let (pos, _) = parse_fen_with(&value, FenOptions { lenient: true })
                        .map_err(|e| err(&game, &games, PgnErrorKind::Fen(e)))?;
                    game.start = Some(pos);
                    game.pos = pos;
                }
                game.tags.push((key, value));
            }
            Token::Open => {
                in_movetext = true;
                game.depth += 1;
            }
            Token::Close => {
                if game.depth == 0 {
                    return Err(err(&game, &games, PgnErrorKind::Token(")".into())));
                }
                game.depth -= 1;
            }
            Token::Result(result) => {
                if game.depth > 0 {
                    continue;
                }
                let done = std::mem::replace(&mut game, GameBuilder::new());
                games.push(done.finish(result));
                in_movetext = false;
            }
            Token::Symbol(word) => {
                in_movetext = true;
                if game.depth > 0 {
                    continue;
                }
                let Some(text) = move_text(word) else {
                    continue;
                };
                let mv = parse_san(&game.pos, text).map_err(|e| err(&game, &games, PgnErrorKind::San(e)))?;
                let san = to_san(&game.pos, &mv);
                game.pos = game.pos.play_unchecked(&mv);
                game.moves.push(PlayedMove { mv, san });
            }
        }
    }
    if game.depth > 0 {
        return Err(PgnError {
            game_index: games.len(),
            ply: game.moves.len(),
            kind: PgnErrorKind::Unterminated("variation"),
        });
    }
    if !game.is_empty() {
        games.push(game.finish(GameResult::Unknown));
    }
    Ok(games)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_game() {
        let text = "[Event \"Test\"]\n[White \"A\"]\n[Black \"B\"]\n[Result \"1/2-1/2\"]\n\n1. e4 e5 1/2-1/2\n";
        let games = parse_pgn(text).unwrap();
        assert_eq!(games.len(), 1);
        let g = &games[0];
        assert_eq!(g.moves().len(), 2);
        assert_eq!(g.result(), GameResult::Draw);
        assert_eq!(g.tag("Event"), Some("Test"));
        assert_eq!(g.tags()[0], ("Event".to_string(), "Test".to_string()));
    }

    #[test]
    fn comments_nags_and_variations_are_skipped() {
        let text = "[Event \"x\"]\n\n1. e4 {best by test} e5 $1 2. Nf3 (2. f4 exf4 (2... d5)) 2... Nc6 ; trailing\n3. Bb5 a6 *";
        let games = parse_pgn(text).unwrap();
        let sans: Vec<&str> = games[0].moves().iter().map(|m| m.san.as_str()).collect();
        assert_eq!(sans, ["e4", "e5", "Nf3", "Nc6", "Bb5", "a6"]);
        assert_eq!(games[0].result(), GameResult::Unknown);
    }

    #[test]
    fn games_come_back_in_file_order() {
        let text = "[White \"first\"]\n1. d4 d5 1-0\n\n[White \"second\"]\n1. c4 0-1\n[White \"third\"]\n1. e4 *\n";
        let games = parse_pgn(text).unwrap();
        let whites: Vec<&str> = games.iter().map(|g| g.tag("White").unwrap()).collect();
        assert_eq!(whites, ["first", "second", "third"]);
        assert_eq!(games[1].result(), GameResult::BlackWins);
    }

    #[test]
    fn broken_movetext_reports_game_and_ply() {
        let text = "[White \"ok\"]\n1. e4 e5 1-0\n\n[White \"bad\"]\n1. e4 e5 2. Ke3 *\n";
        let err = parse_pgn(text).unwrap_err();
        assert_eq!(err.game_index, 1);
        assert_eq!(err.ply, 2);
        assert!(matches!(err.kind, PgnErrorKind::San(SanError::Illegal(_))));
    }

    #[test]
    fn fen_tag_sets_start() {
        let text = "[SetUp \"1\"]\n[FEN \"6k1/5ppp/8/8/8/8/8/R5K1 w - - 0 1\"]\n\n1. Ra8# 1-0\n";
        let games = parse_pgn(text).unwrap();
        assert_eq!(
            games[0].termination(),
            Some(Termination::Checkmate { winner: Color::White })
        );
    }

    #[test]
    fn export_round_trips() {
        let text = "[Event \"x\"]\n[White \"A\"]\n[Black \"B\"]\n\n1. e4 e5 2. Nf3 Nc6 3. Bb5 a6 4. Bxc6 dxc6 1-0\n";
        let g = &parse_pgn(text).unwrap()[0];
        let again = &parse_pgn(&g.to_pgn()).unwrap()[0];
        assert_eq!(g, again);
    }

    #[test]
    fn repetition_is_detected() {
        let text = "1. Nf3 Nf6 2. Ng1 Ng8 3. Nf3 Nf6 4. Ng1 Ng8 *";
        let g = &parse_pgn(text).unwrap()[0];
        assert_eq!(g.termination(), Some(Termination::ThreefoldRepetition));
    }
}
