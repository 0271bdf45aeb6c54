//! Endgame material specs and the enumerated state space.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::chess::{CastlingRights, Color, Piece, Position, Role, Square};
use crate::par::{self, Parallelism};

/// Non-king material for each side; kings are implied.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EndgameSpec {
    pub white: Vec<Role>,
    pub black: Vec<Role>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SpecError {
    #[error("cannot parse endgame '{0}': expected something like KQvK")]
    Syntax(String),
    #[error("unknown piece letter '{0}'")]
    Piece(char),
    #[error("pawns are not supported")]
    Pawns,
    #[error("{pieces} non-king pieces exceed the limit of {limit}; about {estimated_states} states")]
    TooLarge {
        pieces: usize,
        limit: usize,
        estimated_states: f64,
    },
}

fn role_order(r: Role) -> u8 {
    match r {
        Role::Queen => 0,
        Role::Rook => 1,
        Role::Bishop => 2,
        Role::Knight => 3,
        Role::Pawn => 4,
        Role::King => 5,
    }
}

fn parse_side(text: &str, whole: &str) -> Result<Vec<Role>, SpecError> {
    let mut chars = text.chars();
    if chars.next() != Some('K') {
        return Err(SpecError::Syntax(whole.to_string()));
    }
    let mut roles = Vec::new();
    for c in chars {
        match Role::from_char(c.to_ascii_lowercase()) {
            Some(Role::Pawn) => return Err(SpecError::Pawns),
            Some(Role::King) | None => return Err(SpecError::Piece(c)),
            Some(r) if c.is_ascii_uppercase() => roles.push(r),
            Some(_) => return Err(SpecError::Piece(c)),
        }
    }
    roles.sort_by_key(|r| role_order(*r));
    Ok(roles)
}

impl FromStr for EndgameSpec {
    type Err = SpecError;

    fn from_str(text: &str) -> Result<EndgameSpec, SpecError> {
        let t = text.trim();
        let (w, b) = t.split_once('v').ok_or_else(|| SpecError::Syntax(t.to_string()))?;
        Ok(EndgameSpec {
            white: parse_side(w, t)?,
            black: parse_side(b, t)?,
        })
    }
}

impl fmt::Display for EndgameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |roles: &[Role]| roles.iter().map(|r| r.upper_char()).collect::<String>();
        write!(f, "K{}vK{}", side(&self.white), side(&self.black))
    }
}

impl EndgameSpec {
    pub fn piece_count(&self) -> usize {
        self.white.len() + self.black.len()
    }

    /// The same material with colours exchanged.
    pub fn swapped(&self) -> EndgameSpec {
        EndgameSpec {
            white: self.black.clone(),
            black: self.white.clone(),
        }
    }

    /// Material left after `color` loses one `role`.
    pub fn without(&self, color: Color, role: Role) -> Option<EndgameSpec> {
        let mut next = self.clone();
        let side = match color {
            Color::White => &mut next.white,
            Color::Black => &mut next.black,
        };
        let at = side.iter().position(|r| *r == role)?;
        side.remove(at);
        Some(next)
    }

    /// Rough state count before legality filtering.
    pub fn estimated_states(&self, symmetry: bool) -> f64 {
        let raw = 2.0 * 64f64.powi(self.piece_count() as i32 + 2);
        if symmetry {
            raw / 8.0
        } else {
            raw
        }
    }

    pub fn check_size(&self, limit: usize) -> Result<(), SpecError> {
        if self.piece_count() > limit {
            return Err(SpecError::TooLarge {
                pieces: self.piece_count(),
                limit,
                estimated_states: self.estimated_states(true),
            });
        }
        Ok(())
    }

    /// True when `pos` carries exactly this material and nothing else.
    pub fn matches(&self, pos: &Position) -> bool {
        let count = |c: Color, roles: &[Role]| {
            pos.by_color(c).count() as usize == roles.len() + 1
                && [Role::Queen, Role::Rook, Role::Bishop, Role::Knight, Role::Pawn]
                    .iter()
                    .all(|&r| pos.pieces(c, r).count() as usize == roles.iter().filter(|x| **x == r).count())
        };
        count(Color::White, &self.white) && count(Color::Black, &self.black)
    }

    pub fn of_position(pos: &Position) -> EndgameSpec {
        let side = |c: Color| {
            let mut v = Vec::new();
            for r in [Role::Queen, Role::Rook, Role::Bishop, Role::Knight, Role::Pawn] {
                for _ in 0..pos.pieces(c, r).count() {
                    v.push(r);
                }
            }
            v
        };
        EndgameSpec {
            white: side(Color::White),
            black: side(Color::Black),
        }
    }
}

/// One of the eight board symmetries: bit 0 mirrors files, bit 1 mirrors
/// ranks, bit 2 transposes.
pub fn transform(t: u8, sq: u8) -> u8 {
    let (mut f, mut r) = (sq % 8, sq / 8);
    if t & 1 != 0 {
        f = 7 - f;
    }
    if t & 2 != 0 {
        r = 7 - r;
    }
    if t & 4 != 0 {
        std::mem::swap(&mut f, &mut r);
    }
    r * 8 + f
}

/// All legal placements of a spec's material with either side to move,
/// each stored once as a `u64` code in ascending order.
///
/// A code packs the side to move followed by one 6-bit square per piece
/// (white king, black king, then the spec's pieces, white first). With
/// symmetry on, a state is represented by the smallest code among its eight
/// images; identical pieces are always listed in ascending square order.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub spec: EndgameSpec,
    pub symmetry: bool,
    slots: Vec<Piece>,
    /// Runs of identical pieces within `slots`, as (start, len).
    groups: Vec<(usize, usize)>,
    codes: Vec<u64>,
}

impl StateSpace {
    pub fn enumerate(spec: &EndgameSpec, symmetry: bool, parallelism: Parallelism) -> StateSpace {
        let mut slots = vec![Piece::new(Color::White, Role::King), Piece::new(Color::Black, Role::King)];
        slots.extend(spec.white.iter().map(|&r| Piece::new(Color::White, r)));
        slots.extend(spec.black.iter().map(|&r| Piece::new(Color::Black, r)));
        let mut groups = Vec::new();
        let mut i = 2;
        while i < slots.len() {
            let mut j = i + 1;
            while j < slots.len() && slots[j] == slots[i] {
                j += 1;
            }
            if j - i > 1 {
                groups.push((i, j - i));
            }
            i = j;
        }
        let mut space = StateSpace {
            spec: spec.clone(),
            symmetry,
            slots,
            groups,
            codes: Vec::new(),
        };

        let first: Vec<u8> = if symmetry {
            (0..64u8).filter(|&s| s % 8 <= 3 && s / 8 <= s % 8).collect()
        } else {
            (0..64u8).collect()
        };
        let n = space.slots.len();
        let chunks = par::map_slice(&first, parallelism, |&wk| {
            let mut found = Vec::new();
            let mut squares = vec![0u8; n];
            squares[0] = wk;
            let rest = 64u64.pow(n as u32 - 1);
            for stm in [Color::White, Color::Black] {
                for k in 0..rest {
                    let mut x = k;
                    for s in (1..n).rev() {
                        squares[s] = (x % 64) as u8;
                        x /= 64;
                    }
                    let code = space.raw_code(stm, &squares);
                    if space.canonical_code(stm, &squares) == code && space.is_legal(stm, &squares) {
                        found.push(code);
                    }
                }
            }
            found
        });
        let mut codes: Vec<u64> = chunks.into_iter().flatten().collect();
        codes.sort_unstable();
        codes.dedup();
        space.codes = codes;
        space
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    fn raw_code(&self, stm: Color, squares: &[u8]) -> u64 {
        squares.iter().fold(stm.index() as u64, |acc, &s| acc * 64 + s as u64)
    }

    fn sort_groups(&self, squares: &mut [u8]) {
        for &(start, len) in &self.groups {
            squares[start..start + len].sort_unstable();
        }
    }

    fn canonical_code(&self, stm: Color, squares: &[u8]) -> u64 {
        let mut best = u64::MAX;
        let mut buf = squares.to_vec();
        for t in 0..if self.symmetry { 8 } else { 1 } {
            for (b, &s) in buf.iter_mut().zip(squares) {
                *b = transform(t, s);
            }
            self.sort_groups(&mut buf);
            best = best.min(self.raw_code(stm, &buf));
        }
        best
    }

    fn is_legal(&self, stm: Color, squares: &[u8]) -> bool {
        for i in 0..squares.len() {
            for j in i + 1..squares.len() {
                if squares[i] == squares[j] {
                    return false;
                }
            }
        }
        if Square::new(squares[0]).distance(Square::new(squares[1])) <= 1 {
            return false;
        }
        let pos = self.build(stm, squares);
        !pos.is_attacked(pos.king_of(!stm), stm)
    }

    fn build(&self, stm: Color, squares: &[u8]) -> Position {
        Position::from_parts_unchecked(
            squares.iter().zip(&self.slots).map(|(&s, &p)| (Square::new(s), p)),
            stm,
            CastlingRights::NONE,
            None,
            0,
            1,
        )
    }

    fn decode(&self, code: u64) -> (Color, Vec<u8>) {
        let n = self.slots.len();
        let mut squares = vec![0u8; n];
        let mut x = code;
        for s in (0..n).rev() {
            squares[s] = (x % 64) as u8;
            x /= 64;
        }
        let stm = if x == 0 { Color::White } else { Color::Black };
        (stm, squares)
    }

    pub fn position(&self, index: usize) -> Position {
        let (stm, squares) = self.decode(self.codes[index]);
        self.build(stm, &squares)
    }

    /// Canonical code of a position with this space's material.
    pub fn code_of(&self, pos: &Position) -> Option<u64> {
        if !self.spec.matches(pos) {
            return None;
        }
        let mut squares = Vec::with_capacity(self.slots.len());
        let mut i = 0;
        while i < self.slots.len() {
            let p = self.slots[i];
            let run = self.slots[i..].iter().take_while(|q| **q == p).count();
            squares.extend(pos.pieces(p.color, p.role).map(|s| s.index() as u8));
            i += run;
        }
        Some(self.canonical_code(pos.side_to_move(), &squares))
    }

    pub fn index_of(&self, pos: &Position) -> Option<usize> {
        let code = self.code_of(pos)?;
        self.codes.binary_search(&code).ok()
    }

    /// Number of states with the given side to move.
    pub fn count_to_move(&self, color: Color) -> usize {
        let split = self.codes.partition_point(|&c| self.decode(c).0 == Color::White);
        match color {
            Color::White => split,
            Color::Black => self.codes.len() - split,
        }
    }
}
