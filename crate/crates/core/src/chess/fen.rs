//! Forsyth-Edwards Notation.

use std::fmt;

use thiserror::Error;

use super::position::{CastlingRights, Position, PositionError};
use super::types::{Color, Piece, Square};

pub const STARTING_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FenField {
    FieldCount,
    Placement,
    SideToMove,
    Castling,
    EnPassant,
    HalfmoveClock,
    FullmoveNumber,
}

impl fmt::Display for FenField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FenField::FieldCount => "field count",
            FenField::Placement => "piece placement",
            FenField::SideToMove => "side to move",
            FenField::Castling => "castling rights",
            FenField::EnPassant => "en passant square",
            FenField::HalfmoveClock => "halfmove clock",
            FenField::FullmoveNumber => "fullmove number",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid FEN ({field}): {message}")]
pub struct FenError {
    pub field: FenField,
    pub message: String,
}

impl FenError {
    fn new(field: FenField, message: impl Into<String>) -> FenError {
        FenError {
            field,
            message: message.into(),
        }
    }
}

impl From<PositionError> for FenError {
    fn from(err: PositionError) -> FenError {
        let field = match err {
            PositionError::InvalidCastling(_) => FenField::Castling,
            PositionError::InvalidEnPassant(_) => FenField::EnPassant,
            PositionError::InvalidFullmove => FenField::FullmoveNumber,
            PositionError::OppositeCheck => FenField::SideToMove,
            _ => FenField::Placement,
        };
        FenError::new(field, err.to_string())
    }
}

/// Parser switches. Strict by default.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct FenOptions {
    /// Drop castling rights and en passant squares the board cannot
    /// support instead of rejecting the record.
    pub lenient: bool,
}

/// Something the lenient parser changed while accepting a record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FenNote {
    DroppedCastling(char),
    DroppedEnPassant(Square),
}

impl fmt::Display for FenNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FenNote::DroppedCastling(c) => {
                write!(f, "castling right '{c}' dropped: king or rook not on its home square")
            }
            FenNote::DroppedEnPassant(sq) => {
                write!(f, "en passant square {sq} dropped: no pawn could have just passed it")
            }
        }
    }
}

/// Parses a six-field FEN record strictly.
pub fn parse_fen(text: &str) -> Result<Position, FenError> {
    parse_fen_with(text, FenOptions::default()).map(|(pos, _)| pos)
}

pub fn parse_fen_with(text: &str, options: FenOptions) -> Result<(Position, Vec<FenNote>), FenError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(FenError::new(
            FenField::FieldCount,
            format!("expected 6 fields, found {}", fields.len()),
        ));
    }

    let pieces = parse_placement(fields[0])?;

    let side_to_move = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(FenError::new(FenField::SideToMove, format!("expected 'w' or 'b', found '{other}'"))),
    };

    let mut castling = CastlingRights::NONE;
    if fields[2] != "-" {
        for c in fields[2].chars() {
            let (color, king_side) = match c {
                'K' => (Color::White, true),
                'Q' => (Color::White, false),
                'k' => (Color::Black, true),
                'q' => (Color::Black, false),
                other => {
                    return Err(FenError::new(FenField::Castling, format!("unexpected character '{other}'")))
                }
            };
            if castling.has(color, king_side) {
                return Err(FenError::new(FenField::Castling, format!("duplicate flag '{c}'")));
            }
            castling.set(color, king_side, true);
        }
    }

    let ep_square = match fields[3] {
        "-" => None,
        s => Some(
            Square::parse(s)
                .ok_or_else(|| FenError::new(FenField::EnPassant, format!("'{s}' is not a square")))?,
        ),
    };

    let halfmove_clock: u32 = fields[4]
        .parse()
        .map_err(|_| FenError::new(FenField::HalfmoveClock, format!("'{}' is not a count", fields[4])))?;
    let fullmove_number: u32 = fields[5]
        .parse()
        .map_err(|_| FenError::new(FenField::FullmoveNumber, format!("'{}' is not a count", fields[5])))?;
    if fullmove_number == 0 {
        return Err(FenError::new(FenField::FullmoveNumber, "must be at least 1"));
    }

    let mut pos = Position::from_parts_unchecked(
        pieces.iter().copied(),
        side_to_move,
        castling,
        ep_square,
        halfmove_clock,
        fullmove_number,
    );

    let mut notes = Vec::new();
    if options.lenient {
        let mut repaired = castling;
        for (color, king_side, c) in [
            (Color::White, true, 'K'),
            (Color::White, false, 'Q'),
            (Color::Black, true, 'k'),
            (Color::Black, false, 'q'),
        ] {
            if castling.has(color, king_side) && !pos.castling_setup_ok(color, king_side) {
                repaired.set(color, king_side, false);
                notes.push(FenNote::DroppedCastling(c));
            }
        }
        let ep = match ep_square {
            Some(sq) if !pos.ep_square_ok(sq) => {
                notes.push(FenNote::DroppedEnPassant(sq));
                None
            }
            other => other,
        };
        if !notes.is_empty() {
            pos = Position::from_parts_unchecked(
                pieces.iter().copied(),
                side_to_move,
                repaired,
                ep,
                halfmove_clock,
                fullmove_number,
            );
        }
    }

    pos.validate()?;
    Ok((pos, notes))
}

fn parse_placement(text: &str) -> Result<Vec<(Square, Piece)>, FenError> {
    let ranks: Vec<&str> = text.split('/').collect();
    if ranks.len() != 8 {
        return Err(FenError::new(
            FenField::Placement,
            format!("expected 8 ranks, found {}", ranks.len()),
        ));
    }
    let mut pieces = Vec::with_capacity(32);
    for (i, rank_text) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in rank_text.chars() {
            if let Some(d) = c.to_digit(10) {
                if !(1..=8).contains(&d) {
                    return Err(FenError::new(FenField::Placement, format!("bad empty-square count '{c}'")));
                }
                file += d as u8;
            } else if let Some(piece) = Piece::from_fen_char(c) {
                if file >= 8 {
                    return Err(FenError::new(FenField::Placement, format!("rank {} is too long", rank + 1)));
                }
                pieces.push((Square::from_coords(file, rank), piece));
                file += 1;
            } else {
                return Err(FenError::new(FenField::Placement, format!("unexpected character '{c}'")));
            }
            if file > 8 {
                return Err(FenError::new(FenField::Placement, format!("rank {} is too long", rank + 1)));
            }
        }
        if file != 8 {
            return Err(FenError::new(FenField::Placement, format!("rank {} has {} files", rank + 1, file)));
        }
    }
    Ok(pieces)
}

pub fn emit_fen(pos: &Position) -> String {
    let mut out = String::with_capacity(90);
    for rank in (0..8u8).rev() {
        let mut empty = 0;
        for file in 0..8u8 {
            match pos.piece_at(Square::from_coords(file, rank)) {
                Some(piece) => {
                    if empty > 0 {
                        out.push(char::from(b'0' + empty));
                        empty = 0;
                    }
                    out.push(piece.fen_char());
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            out.push(char::from(b'0' + empty));
        }
        if rank > 0 {
            out.push('/');
        }
    }
    out.push(' ');
    out.push(pos.side_to_move().fold('w', 'b'));
    out.push(' ');
    out.push_str(&pos.castling_rights().to_string());
    out.push(' ');
    match pos.ep_square() {
        Some(sq) => out.push_str(&sq.to_string()),
        None => out.push('-'),
    }
    out.push_str(&format!(" {} {}", pos.halfmove_clock(), pos.fullmove_number()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_fen_round_trips() {
        let pos = parse_fen(STARTING_FEN).unwrap();
        assert_eq!(pos, Position::startpos());
        assert_eq!(emit_fen(&pos), STARTING_FEN);
    }

    #[test]
    fn empty_board_is_missing_kings() {
        let err = parse_fen("8/8/8/8/8/8/8/8 w - - 0 1").unwrap_err();
        assert_eq!(err.field, FenField::Placement);
        assert!(err.message.contains("no king"));
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -", FenField::FieldCount),
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP w KQkq - 0 1", FenField::Placement),
            ("rnbqkbnr/pppppppp/9/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", FenField::Placement),
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR x KQkq - 0 1", FenField::SideToMove),
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQxq - 0 1", FenField::Castling),
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq z9 0 1", FenField::EnPassant),
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - x 1", FenField::HalfmoveClock),
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 0", FenField::FullmoveNumber),
            ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq e3 0 1", FenField::EnPassant),
            // black king in check with white to move
            ("4k3/8/8/8/8/8/8/4R1K1 w - - 0 1", FenField::SideToMove),
        ];
        for (fen, field) in cases {
            let err = parse_fen(fen).unwrap_err();
            assert_eq!(err.field, field, "{fen}: {err}");
        }
    }

    #[test]
    fn pawn_count_and_back_rank() {
        assert!(parse_fen("4k3/pppppppp/p7/8/8/8/8/4K3 w - - 0 1").is_err());
        assert!(parse_fen("P3k3/8/8/8/8/8/8/4K3 w - - 0 1").is_err());
    }

    #[test]
    fn lenient_mode_drops_impossible_castling() {
        let fen = "3rn1k1/5ppn/1p1P4/1r2pPP1/2q1P3/5BK1/1R5Q/3R4 w q - 0 1";
        assert_eq!(parse_fen(fen).unwrap_err().field, FenField::Castling);
        let (pos, notes) = parse_fen_with(fen, FenOptions { lenient: true }).unwrap();
        assert_eq!(notes, vec![FenNote::DroppedCastling('q')]);
        assert!(pos.castling_rights().is_empty());
        assert_eq!(pos.side_to_move(), Color::White);
    }

    #[test]
    fn anchor_fen_round_trips_verbatim() {
        let fen = "7Q/5kpp/5n2/4n1B1/4q3/5R2/PP4KP/R7 w - - 0 1";
        assert_eq!(emit_fen(&parse_fen(fen).unwrap()), fen);
    }
}
