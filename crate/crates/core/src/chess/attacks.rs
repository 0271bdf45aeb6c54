//! Precomputed attack tables and ray-scan sliding attacks.

use std::sync::LazyLock;

use super::types::{Bitboard, Color, Square};

const KNIGHT_DELTAS: [(i32, i32); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];

const KING_DELTAS: [(i32, i32); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

// Directions 0..4 increase the square index, 4..8 decrease it.
const RAY_DELTAS: [(i32, i32); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (-1, 1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (1, -1),
];

const ROOK_DIRS: [usize; 4] = [0, 2, 4, 6];
const BISHOP_DIRS: [usize; 4] = [1, 3, 5, 7];

struct Tables {
    knight: [Bitboard; 64],
    king: [Bitboard; 64],
    pawn: [[Bitboard; 64]; 2],
    rays: [[Bitboard; 64]; 8],
    between: Vec<Bitboard>,
}

fn step_table(deltas: &[(i32, i32)]) -> [Bitboard; 64] {
    let mut table = [Bitboard::EMPTY; 64];
    for sq in Square::all() {
        for &(df, dr) in deltas {
            if let Some(to) = sq.offset(df, dr) {
                table[sq.index()] = table[sq.index()].with(to);
            }
        }
    }
    table
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let mut pawn = [[Bitboard::EMPTY; 64]; 2];
    for sq in Square::all() {
        for (color, dr) in [(Color::White, 1), (Color::Black, -1)] {
            for df in [-1, 1] {
                if let Some(to) = sq.offset(df, dr) {
                    pawn[color.index()][sq.index()] = pawn[color.index()][sq.index()].with(to);
                }
            }
        }
    }

    let mut rays = [[Bitboard::EMPTY; 64]; 8];
    for (dir, &(df, dr)) in RAY_DELTAS.iter().enumerate() {
        for sq in Square::all() {
            let mut cur = sq;
            while let Some(next) = cur.offset(df, dr) {
                rays[dir][sq.index()] = rays[dir][sq.index()].with(next);
                cur = next;
            }
        }
    }

    let mut between = vec![Bitboard::EMPTY; 64 * 64];
    for from in Square::all() {
        for &(df, dr) in RAY_DELTAS.iter() {
            let mut acc = Bitboard::EMPTY;
            let mut cur = from;
            while let Some(next) = cur.offset(df, dr) {
                between[from.index() * 64 + next.index()] = acc;
                acc = acc.with(next);
                cur = next;
            }
        }
    }

    Tables {
        knight: step_table(&KNIGHT_DELTAS),
        king: step_table(&KING_DELTAS),
        pawn,
        rays,
        between,
    }
});

#[inline]
pub fn knight_attacks(sq: Square) -> Bitboard {
    TABLES.knight[sq.index()]
}

#[inline]
pub fn king_attacks(sq: Square) -> Bitboard {
    TABLES.king[sq.index()]
}

/// Squares attacked by a pawn of `color` standing on `sq`.
#[inline]
pub fn pawn_attacks(color: Color, sq: Square) -> Bitboard {
    TABLES.pawn[color.index()][sq.index()]
}

#[inline]
fn ray_attacks(dir: usize, sq: Square, occupied: Bitboard) -> Bitboard {
    let ray = TABLES.rays[dir][sq.index()];
    let blockers = ray & occupied;
    let first = if dir < 4 {
        blockers.lsb()
    } else {
        blockers.msb()
    };
    match first {
        Some(b) => ray ^ TABLES.rays[dir][b.index()],
        None => ray,
    }
}

#[inline]
pub fn rook_attacks(sq: Square, occupied: Bitboard) -> Bitboard {
    ROOK_DIRS
        .iter()
        .fold(Bitboard::EMPTY, |acc, &d| acc | ray_attacks(d, sq, occupied))
}

#[inline]
pub fn bishop_attacks(sq: Square, occupied: Bitboard) -> Bitboard {
    BISHOP_DIRS
        .iter()
        .fold(Bitboard::EMPTY, |acc, &d| acc | ray_attacks(d, sq, occupied))
}

#[inline]
pub fn queen_attacks(sq: Square, occupied: Bitboard) -> Bitboard {
    rook_attacks(sq, occupied) | bishop_attacks(sq, occupied)
}

/// Squares strictly between two aligned squares; empty if not aligned.
#[inline]
pub fn between(a: Square, b: Square) -> Bitboard {
    TABLES.between[a.index() * 64 + b.index()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(s: &str) -> Square {
        Square::parse(s).unwrap()
    }

    #[test]
    fn leaper_counts() {
        assert_eq!(knight_attacks(sq("a1")).count(), 2);
        assert_eq!(knight_attacks(sq("d4")).count(), 8);
        assert_eq!(king_attacks(sq("h8")).count(), 3);
        assert_eq!(pawn_attacks(Color::White, sq("a2")), sq("b3").bb());
        assert_eq!(pawn_attacks(Color::Black, sq("e5")).count(), 2);
    }

    #[test]
    fn sliders_stop_at_blockers() {
        let occ = sq("d6").bb() | sq("f4").bb();
        let r = rook_attacks(sq("d4"), occ);
        assert!(r.contains(sq("d6")));
        assert!(!r.contains(sq("d7")));
        assert!(r.contains(sq("f4")));
        assert!(!r.contains(sq("g4")));
        assert_eq!(rook_attacks(sq("a1"), Bitboard::EMPTY).count(), 14);
        assert_eq!(bishop_attacks(sq("d4"), Bitboard::EMPTY).count(), 13);
    }

    #[test]
    fn between_squares() {
        assert_eq!(between(sq("a1"), sq("a4")), sq("a2").bb() | sq("a3").bb());
        assert_eq!(between(sq("a1"), sq("b3")), Bitboard::EMPTY);
        assert_eq!(between(sq("h8"), sq("e5")).count(), 2);
    }
}
