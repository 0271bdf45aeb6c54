//! Exhaustive forced-mate search on the mailbox board, independent of the
//! bitboard move generator and of the endgame solver.
#![allow(dead_code)]

use std::collections::HashMap;

use sacscore::chess::{emit_fen, Position};

use super::mailbox::{Board, KING};

pub type Memo = HashMap<([i8; 64], bool, u32), bool>;

pub fn only_kings(b: &Board) -> bool {
    b.sq.iter().all(|&p| p == 0 || p.abs() == KING)
}

/// Does white force mate within `n` plies?
pub fn white_mates_within(b: &Board, n: u32, memo: &mut Memo) -> bool {
    let moves = b.legal();
    if moves.is_empty() {
        return !b.white_to_move && b.in_check();
    }
    if n == 0 || only_kings(b) {
        return false;
    }
    let key = (b.sq, b.white_to_move, n);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let v = if b.white_to_move {
        moves.iter().any(|m| white_mates_within(&b.make(m), n - 1, memo))
    } else {
        moves.iter().all(|m| white_mates_within(&b.make(m), n - 1, memo))
    };
    memo.insert(key, v);
    v
}

/// Shortest forced mate in plies, if any within 40.
pub fn oracle_dtm(pos: &Position, memo: &mut Memo) -> Option<u32> {
    let b = Board::from_fen(&emit_fen(pos));
    (0..=40).find(|&n| white_mates_within(&b, n, memo))
}
