//! Sacrifice detection and scoring for chess games, with exact endgame
//! value iteration.
//!
//! * [`chess`]: board, move generation, FEN/SAN/PGN, perft, material and SEE.
//! * [`engine`]: UCI engine client over child-process pipes.
//! * [`sacrifice`]: material-swing sacrifice detector.
//! * [`evaluation`]: win probability, centipawn loss, verdicts and reports.
//! * [`bellman`]: retrograde value iteration over small pawnless endgames.
//! * [`corpus`]: the embedded queen and rook/knight sacrifice datasets.
//! * [`cli`]: the `sacscore` command line.

pub mod chess;
pub mod par;
pub mod sacrifice;
pub mod engine;
pub mod evaluation;
pub mod corpus;
pub mod bellman;
pub mod cli;
