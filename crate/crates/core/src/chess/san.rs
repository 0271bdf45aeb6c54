//! Standard Algebraic Notation.
//!
//! Parsing is tolerant of the usual variations in published scores: a
//! missing or superfluous capture marker, `0-0` for castling, promotion
//! without `=`, and trailing check or annotation glyphs.

use thiserror::Error;

use super::position::Position;
use super::types::{Move, MoveKind, Role, Square};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SanError {
    #[error("cannot parse SAN token '{0}'")]
    Unparseable(String),
    #[error("SAN move '{0}' is illegal in this position")]
    Illegal(String),
    #[error("SAN move '{0}' is ambiguous in this position")]
    Ambiguous(String),
}

#[derive(Debug, PartialEq, Eq)]
enum Pattern {
    Castle {
        king_side: bool,
    },
    Normal {
        role: Role,
        from_file: Option<u8>,
        from_rank: Option<u8>,
        to: Square,
        promotion: Option<Role>,
    },
}

fn parse_pattern(token: &str) -> Option<Pattern> {
    let core = token.trim_end_matches(['+', '#', '!', '?']);
    match core {
        "O-O" | "0-0" => return Some(Pattern::Castle { king_side: true }),
        "O-O-O" | "0-0-0" => return Some(Pattern::Castle { king_side: false }),
        _ => {}
    }
    let mut chars: Vec<char> = core.chars().collect();
    if chars.is_empty() {
        return None;
    }

    let role = match chars[0] {
        'N' | 'B' | 'R' | 'Q' | 'K' => {
            let r = Role::from_char(chars[0])?;
            chars.remove(0);
            r
        }
        _ => Role::Pawn,
    };

    let mut promotion = None;
    if role == Role::Pawn {
        if let Some(&last) = chars.last() {
            if let Some(r) = Role::from_char(last).filter(|r| !matches!(r, Role::Pawn | Role::King)) {
                if last.is_ascii_uppercase() {
                    promotion = Some(r);
                    chars.pop();
                    if chars.last() == Some(&'=') {
                        chars.pop();
                    }
                }
            }
        }
    }

    chars.retain(|&c| c != 'x' && c != '-' && c != ':');
    if chars.len() < 2 {
        return None;
    }
    let dest: String = chars[chars.len() - 2..].iter().collect();
    let to = Square::parse(&dest)?;
    let disambig = &chars[..chars.len() - 2];
    let (mut from_file, mut from_rank) = (None, None);
    for &c in disambig {
        match c {
            'a'..='h' if from_file.is_none() => from_file = Some(c as u8 - b'a'),
            '1'..='8' if from_rank.is_none() => from_rank = Some(c as u8 - b'1'),
            _ => return None,
        }
    }
    if role == Role::Pawn && from_rank.is_some() {
        return None;
    }
    Some(Pattern::Normal {
        role,
        from_file,
        from_rank,
        to,
        promotion,
    })
}

/// Resolves a SAN token to the unique legal move it denotes.
pub fn parse_san(pos: &Position, token: &str) -> Result<Move, SanError> {
    let pattern = parse_pattern(token).ok_or_else(|| SanError::Unparseable(token.to_string()))?;
    let legal = pos.legal_moves();
    let candidates: Vec<Move> = match pattern {
        Pattern::Castle { king_side } => legal
            .into_iter()
            .filter(|m| m.kind == MoveKind::Castle && (m.to.file() == 6) == king_side)
            .collect(),
        Pattern::Normal {
            role,
            from_file,
            from_rank,
            to,
            promotion,
        } => legal
            .into_iter()
            .filter(|m| {
                m.kind != MoveKind::Castle
                    && m.to == to
                    && pos.piece_at(m.from).map(|p| p.role) == Some(role)
                    && from_file.is_none_or(|f| m.from.file() == f)
                    && from_rank.is_none_or(|r| m.from.rank() == r)
                    && m.promotion == promotion
            })
            .collect(),
    };
    match candidates.as_slice() {
        [m] => Ok(*m),
        [] => Err(SanError::Illegal(token.to_string())),
        _ => Err(SanError::Ambiguous(token.to_string())),
    }
}

/// Renders a legal move in SAN, including check and mate suffixes.
pub fn to_san(pos: &Position, m: &Move) -> String {
    let mut san = san_without_suffix(pos, m);
    let after = pos.play_unchecked(m);
    if after.in_check() {
        san.push(if after.has_legal_move() { '+' } else { '#' });
    }
    san
}

fn san_without_suffix(pos: &Position, m: &Move) -> String {
    if m.kind == MoveKind::Castle {
        return if m.to.file() == 6 { "O-O" } else { "O-O-O" }.to_string();
    }
    let role = pos.piece_at(m.from).map(|p| p.role).unwrap_or(Role::Pawn);
    let capture = pos.is_capture(m);
    let mut san = String::with_capacity(8);
    if role == Role::Pawn {
        if capture {
            san.push(m.from.file_char());
            san.push('x');
        }
        san.push_str(&m.to.to_string());
        if let Some(promo) = m.promotion {
            san.push('=');
            san.push(promo.upper_char());
        }
        return san;
    }

    san.push(role.upper_char());
    let rivals: Vec<Move> = pos
        .legal_moves()
        .into_iter()
        .filter(|o| o.to == m.to && o.from != m.from && pos.piece_at(o.from).map(|p| p.role) == Some(role))
        .collect();
    if !rivals.is_empty() {
        let file_unique = rivals.iter().all(|o| o.from.file() != m.from.file());
        let rank_unique = rivals.iter().all(|o| o.from.rank() != m.from.rank());
        if file_unique {
            san.push(m.from.file_char());
        } else if rank_unique {
            san.push(m.from.rank_char());
        } else {
            san.push(m.from.file_char());
            san.push(m.from.rank_char());
        }
    }
    if capture {
        san.push('x');
    }
    san.push_str(&m.to.to_string());
    san
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::fen::{parse_fen, parse_fen_with, FenOptions};

    fn sq(s: &str) -> Square {
        Square::parse(s).unwrap()
    }

    #[test]
    fn knight_development() {
        let pos = Position::startpos();
        let m = parse_san(&pos, "Nf3").unwrap();
        assert_eq!((m.from, m.to), (sq("g1"), sq("f3")));
        assert_eq!(to_san(&pos, &m), "Nf3");
    }

    #[test]
    fn error_kinds_are_distinct() {
        let pos = Position::startpos();
        assert_eq!(parse_san(&pos, "Nf6"), Err(SanError::Illegal("Nf6".into())));
        assert_eq!(parse_san(&pos, "Zz9"), Err(SanError::Unparseable("Zz9".into())));
        assert_eq!(parse_san(&pos, "--"), Err(SanError::Unparseable("--".into())));
        let pos = parse_fen("4k3/8/8/8/8/8/4K3/R6R w - - 0 1").unwrap();
        assert_eq!(parse_san(&pos, "Rd1"), Err(SanError::Ambiguous("Rd1".into())));
        assert_eq!(parse_san(&pos, "Rad1").unwrap().from, sq("a1"));
        assert_eq!(parse_san(&pos, "Rhd1").unwrap().from, sq("h1"));
    }

    #[test]
    fn capture_marker_is_optional() {
        let fen = "3rn1k1/5ppn/1p1P4/1r2pPP1/2q1P3/5BK1/1R5Q/3R4 w q - 0 1";
        let (pos, _) = parse_fen_with(fen, FenOptions { lenient: true }).unwrap();
        for token in ["Qh7+", "Qxh7+", "Qxh7"] {
            let m = parse_san(&pos, token).unwrap();
            assert_eq!((m.from, m.to), (sq("h2"), sq("h7")));
        }
        let m = parse_san(&pos, "Qh7+").unwrap();
        assert_eq!(to_san(&pos, &m), "Qxh7+");
    }

    #[test]
    fn castling_and_promotion() {
        let pos = parse_fen("r3k2r/1P6/8/8/8/8/8/R3K2R w KQkq - 0 1").unwrap();
        let m = parse_san(&pos, "O-O-O").unwrap();
        assert_eq!(m.to, sq("c1"));
        assert_eq!(parse_san(&pos, "0-0").unwrap().to, sq("g1"));
        let promo = parse_san(&pos, "bxa8=Q+").unwrap();
        assert_eq!(promo.promotion, Some(Role::Queen));
        assert_eq!(parse_san(&pos, "bxa8N").unwrap().promotion, Some(Role::Knight));
        assert_eq!(to_san(&pos, &promo), "bxa8=Q+");
    }

    #[test]
    fn mate_suffix() {
        let pos = parse_fen("6k1/5ppp/8/8/8/8/8/R5K1 w - - 0 1").unwrap();
        let m = parse_san(&pos, "Ra8").unwrap();
        assert_eq!(to_san(&pos, &m), "Ra8#");
    }
}
