//! Sacrifice detection.
//!
//! A move is a sacrifice when the mover comes out behind in material once
//! the capture sequence it invites has played out. The sequence is found by
//! a capture-only minimax over a bounded horizon: each side may take
//! anything legal or stop, the mover maximizing material and the opponent
//! minimizing it.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::chess::{material_balance, static_exchange_eval, to_san, Color, GameRecord, Move, Position, Role};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceClass {
    Queen,
    Rook,
    Bishop,
    Knight,
    Pawn,
}

impl PieceClass {
    pub fn from_role(role: Role) -> Option<PieceClass> {
        match role {
            Role::Queen => Some(PieceClass::Queen),
            Role::Rook => Some(PieceClass::Rook),
            Role::Bishop => Some(PieceClass::Bishop),
            Role::Knight => Some(PieceClass::Knight),
            Role::Pawn => Some(PieceClass::Pawn),
            Role::King => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PieceClass::Queen => "queen",
            PieceClass::Rook => "rook",
            PieceClass::Bishop => "bishop",
            PieceClass::Knight => "knight",
            PieceClass::Pawn => "pawn",
        }
    }
}

impl fmt::Display for PieceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Corpus partition used by the reports.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bucket {
    Queen,
    RookOrKnight,
    Other,
}

impl Bucket {
    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Queen => "queen",
            Bucket::RookOrKnight => "rook-or-knight",
            Bucket::Other => "other",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SacrificeEvent {
    pub game_id: String,
    /// Zero-based index into the game's move list.
    pub ply: usize,
    pub mover: Color,
    pub piece_class: PieceClass,
    #[serde(rename = "move")]
    pub mv: Move,
    pub san: String,
    pub material_swing: i32,
    pub immediate_see: i32,
    pub declined: bool,
    /// The capture line behind the swing, starting with the move itself.
    pub line: Vec<Move>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DetectorConfig {
    /// Plies searched, counting the move under test.
    pub horizon_plies: u32,
    pub swing_threshold: i32,
    pub queen_net_threshold: i32,
    pub exclude_even_trades: bool,
    /// Drop events where every alternative loses at least as much material.
    pub skip_forced: bool,
}

impl Default for DetectorConfig {
    fn default() -> DetectorConfig {
        DetectorConfig {
            horizon_plies: 6,
            swing_threshold: 2,
            queen_net_threshold: 4,
            exclude_even_trades: true,
            skip_forced: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("horizon must be at least 2 plies, got {0}")]
    Horizon(u32),
    #[error("thresholds must be positive")]
    Threshold,
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon_plies < 2 {
            return Err(ConfigError::Horizon(self.horizon_plies));
        }
        if self.swing_threshold <= 0 || self.queen_net_threshold <= 0 {
            return Err(ConfigError::Threshold);
        }
        Ok(())
    }
}

/// Result of the capture search behind a swing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwingLine {
    pub swing: i32,
    pub line: Vec<Move>,
}

fn ordered_captures(pos: &Position) -> Vec<Move> {
    let mut caps = pos.legal_captures();
    // most valuable victim first, then least valuable attacker; stable so
    // ties keep generation order and the line stays deterministic
    caps.sort_by_key(|m| {
        let victim = pos.captured_piece(m).map_or(0, |p| p.role.value());
        let attacker = pos.piece_at(m.from).map_or(0, |p| p.role.value());
        (-victim, attacker)
    });
    caps
}

fn search(pos: &Position, plies_left: u32, mut alpha: i32, mut beta: i32, mover: Color, line: &mut Vec<Move>) -> i32 {
    let stand_pat = material_balance(pos) * mover.sign();
    line.clear();
    if plies_left == 0 {
        return stand_pat;
    }
    let maximizing = pos.side_to_move() == mover;
    let mut best = stand_pat;
    if maximizing {
        alpha = alpha.max(best);
    } else {
        beta = beta.min(best);
    }
    if alpha >= beta {
        return best;
    }
    let mut child_line = Vec::new();
    for m in ordered_captures(pos) {
        let v = search(&pos.play_unchecked(&m), plies_left - 1, alpha, beta, mover, &mut child_line);
        let better = if maximizing { v > best } else { v < best };
        if better {
            best = v;
            line.clear();
            line.push(m);
            line.extend_from_slice(&child_line);
        }
        if maximizing {
            alpha = alpha.max(best);
        } else {
            beta = beta.min(best);
        }
        if alpha >= beta {
            break;
        }
    }
    best
}

/// Worst-case material change for the mover after `m`, in pawns, with the
/// capture line that realizes it. `horizon` counts `m` itself.
pub fn swing_line(pos: &Position, m: &Move, horizon: u32) -> SwingLine {
    let mover = pos.side_to_move();
    let before = material_balance(pos) * mover.sign();
    let after = pos.play_unchecked(m);
    let mut tail = Vec::new();
    let value = search(&after, horizon.saturating_sub(1), i32::MIN + 1, i32::MAX, mover, &mut tail);
    let mut line = Vec::with_capacity(tail.len() + 1);
    line.push(*m);
    line.extend(tail);
    SwingLine {
        swing: value - before,
        line,
    }
}

pub fn material_swing(pos: &Position, m: &Move, horizon: u32) -> i32 {
    swing_line(pos, m, horizon).swing
}

/// Most valuable unit the mover loses along `line`. With `cancel_trades`,
/// like-for-like losses (queen for queen, rook for rook, ...) cancel first.
pub fn given_up_class(pos: &Position, line: &[Move], cancel_trades: bool) -> Option<PieceClass> {
    let mover = pos.side_to_move();
    let mut lost: Vec<Role> = Vec::new();
    let mut won: Vec<Role> = Vec::new();
    let mut cur = *pos;
    for m in line {
        if let Some(victim) = cur.captured_piece(m) {
            if victim.color == mover {
                lost.push(victim.role);
            } else {
                won.push(victim.role);
            }
        }
        cur = cur.play_unchecked(m);
    }
    if cancel_trades {
        lost.retain(|role| match won.iter().position(|w| w == role) {
            Some(i) => {
                won.swap_remove(i);
                false
            }
            None => true,
        });
    }
    let moved = pos.piece_at(line.first()?.from).map(|p| p.role);
    let top = lost.iter().map(|r| r.value()).max()?;
    let pick = if moved.is_some_and(|r| r.value() == top && lost.contains(&r)) {
        moved.unwrap()
    } else {
        // among equal values prefer the knight: it is the class the reports track
        [Role::Queen, Role::Rook, Role::Knight, Role::Bishop, Role::Pawn]
            .into_iter()
            .find(|r| r.value() == top && lost.contains(r))?
    };
    PieceClass::from_role(pick)
}

fn opponent_can_win_material(after: &Position) -> bool {
    after.legal_captures().iter().any(|c| static_exchange_eval(after, c) > 0)
}

/// Scans every ply of `game` for sacrifices.
pub fn detect_sacrifices(game: &GameRecord, cfg: &DetectorConfig) -> Vec<SacrificeEvent> {
    let positions = game.positions();
    let moves = game.moves();
    let game_id = game.id();
    let mut events = Vec::new();
    for (ply, played) in moves.iter().enumerate() {
        let pos = &positions[ply];
        if let Some(event) = event_at(pos, &played.mv, cfg) {
            let after = &positions[ply + 1];
            let declined = match moves.get(ply + 1) {
                Some(reply) => {
                    opponent_can_win_material(after)
                        && !(after.is_capture(&reply.mv) && static_exchange_eval(after, &reply.mv) > 0)
                }
                None => false,
            };
            events.push(SacrificeEvent {
                game_id: game_id.clone(),
                ply,
                declined,
                ..event
            });
        }
    }
    events
}

/// Event test for a single move, without game context (no id, never declined).
pub fn event_at(pos: &Position, m: &Move, cfg: &DetectorConfig) -> Option<SacrificeEvent> {
    let SwingLine { swing, line } = swing_line(pos, m, cfg.horizon_plies);
    if swing > -cfg.swing_threshold {
        return None;
    }
    let class = given_up_class(pos, &line, cfg.exclude_even_trades)?;
    if class == PieceClass::Queen && swing > -cfg.queen_net_threshold {
        return None;
    }
    if cfg.skip_forced
        && pos
            .legal_moves()
            .iter()
            .filter(|alt| *alt != m)
            .all(|alt| material_swing(pos, alt, cfg.horizon_plies) <= swing)
    {
        return None;
    }
    Some(SacrificeEvent {
        game_id: String::new(),
        ply: 0,
        mover: pos.side_to_move(),
        piece_class: class,
        mv: *m,
        san: to_san(pos, m),
        material_swing: swing,
        immediate_see: static_exchange_eval(pos, m),
        declined: false,
        line,
    })
}

pub fn classify_sacrifice(event: &SacrificeEvent) -> Bucket {
    match event.piece_class {
        PieceClass::Queen => Bucket::Queen,
        PieceClass::Rook | PieceClass::Knight => Bucket::RookOrKnight,
        _ => Bucket::Other,
    }
}
