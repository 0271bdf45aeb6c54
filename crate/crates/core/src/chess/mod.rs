//! Board representation and the rules of chess.

pub mod attacks;
pub mod fen;
pub mod material;
pub mod perft;
pub mod pgn;
pub mod position;
pub mod san;
mod types;

pub use fen::{emit_fen, parse_fen, parse_fen_with, FenError, FenField, FenNote, FenOptions, STARTING_FEN};
pub use material::{material_balance, material_of, static_exchange_eval, swap_exchange_eval};
pub use perft::{divide, perft, perft_with};
pub use pgn::{parse_pgn, GameRecord, GameResult, PgnError, PgnErrorKind, PlayedMove, Termination};
pub use position::{CastlingRights, IllegalMove, Position, PositionError, Status};
pub use san::{parse_san, to_san, SanError};
pub use types::{Bitboard, Color, Move, MoveKind, Piece, Role, Square};

/// Finds the legal move with the given UCI spelling (`e2e4`, `e7e8q`).
pub fn parse_uci_move(pos: &Position, text: &str) -> Option<Move> {
    pos.legal_moves().into_iter().find(|m| m.to_uci() == text)
}
