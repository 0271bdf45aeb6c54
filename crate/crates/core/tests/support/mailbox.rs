//! Deliberately naive mailbox move generator used as an independent oracle
//! for perft and exchange-evaluation checks. Shares no code with the crate's
//! bitboard generator.

#![allow(dead_code)]

pub const EMPTY: i8 = 0;
pub const PAWN: i8 = 1;
pub const KNIGHT: i8 = 2;
pub const BISHOP: i8 = 3;
pub const ROOK: i8 = 4;
pub const QUEEN: i8 = 5;
pub const KING: i8 = 6;

const KNIGHT_STEPS: [(i32, i32); 8] = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
const KING_STEPS: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const ROOK_DIRS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const BISHOP_DIRS: [(i32, i32); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Board squares hold `+piece` for white and `-piece` for black.
#[derive(Clone, Debug)]
pub struct Board {
    pub sq: [i8; 64],
    pub white_to_move: bool,
    /// K, Q, k, q
    pub castle: [bool; 4],
    pub ep: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MMove {
    pub from: usize,
    pub to: usize,
    pub promo: i8,
    pub ep: bool,
    pub castle: bool,
}

fn idx(file: i32, rank: i32) -> Option<usize> {
    if (0..8).contains(&file) && (0..8).contains(&rank) {
        Some((rank * 8 + file) as usize)
    } else {
        None
    }
}

fn fr(i: usize) -> (i32, i32) {
    ((i % 8) as i32, (i / 8) as i32)
}

impl Board {
    pub fn from_fen(fen: &str) -> Board {
        let parts: Vec<&str> = fen.split_whitespace().collect();
        let mut sq = [EMPTY; 64];
        for (ri, row) in parts[0].split('/').enumerate() {
            let rank = 7 - ri as i32;
            let mut file = 0;
            for c in row.chars() {
                if let Some(d) = c.to_digit(10) {
                    file += d as i32;
                    continue;
                }
                let p = match c.to_ascii_lowercase() {
                    'p' => PAWN,
                    'n' => KNIGHT,
                    'b' => BISHOP,
                    'r' => ROOK,
                    'q' => QUEEN,
                    'k' => KING,
                    _ => panic!("bad piece {c}"),
                };
                sq[idx(file, rank).unwrap()] = if c.is_ascii_uppercase() { p } else { -p };
                file += 1;
            }
        }
        let castle = ['K', 'Q', 'k', 'q'].map(|c| parts[2].contains(c));
        let ep = if parts[3] == "-" {
            None
        } else {
            let b = parts[3].as_bytes();
            idx((b[0] - b'a') as i32, (b[1] - b'1') as i32)
        };
        Board {
            sq,
            white_to_move: parts[1] == "w",
            castle,
            ep,
        }
    }

    fn sign(&self) -> i8 {
        if self.white_to_move {
            1
        } else {
            -1
        }
    }

    /// Is square `target` attacked by the side with sign `by`?
    pub fn attacked(&self, target: usize, by: i8) -> bool {
        let (tf, tr) = fr(target);
        for &(df, dr) in KNIGHT_STEPS.iter() {
            if let Some(i) = idx(tf + df, tr + dr) {
                if self.sq[i] == by * KNIGHT {
                    return true;
                }
            }
        }
        for &(df, dr) in KING_STEPS.iter() {
            if let Some(i) = idx(tf + df, tr + dr) {
                if self.sq[i] == by * KING {
                    return true;
                }
            }
        }
        // a pawn of sign `by` attacks from one rank behind (relative to its direction)
        let pawn_rank = tr - by as i32;
        for df in [-1, 1] {
            if let Some(i) = idx(tf + df, pawn_rank) {
                if self.sq[i] == by * PAWN {
                    return true;
                }
            }
        }
        for (dirs, slider) in [(ROOK_DIRS, ROOK), (BISHOP_DIRS, BISHOP)] {
            for &(df, dr) in dirs.iter() {
                let (mut f, mut r) = (tf + df, tr + dr);
                while let Some(i) = idx(f, r) {
                    let p = self.sq[i];
                    if p != EMPTY {
                        if p == by * slider || p == by * QUEEN {
                            return true;
                        }
                        break;
                    }
                    f += df;
                    r += dr;
                }
            }
        }
        false
    }

    fn king_square(&self, sign: i8) -> usize {
        self.sq.iter().position(|&p| p == sign * KING).expect("king present")
    }

    pub fn in_check(&self) -> bool {
        let s = self.sign();
        self.attacked(self.king_square(s), -s)
    }

    fn pseudo(&self) -> Vec<MMove> {
        let s = self.sign();
        let mut out = Vec::new();
        let push = |out: &mut Vec<MMove>, from, to| {
            out.push(MMove { from, to, promo: 0, ep: false, castle: false })
        };
        for from in 0..64 {
            let p = self.sq[from];
            if p == EMPTY || p.signum() != s {
                continue;
            }
            let (f, r) = fr(from);
            match p.abs() {
                PAWN => {
                    let dir = s as i32;
                    let last = if s > 0 { 7 } else { 0 };
                    let start = if s > 0 { 1 } else { 6 };
                    let add = |out: &mut Vec<MMove>, to: usize, ep: bool| {
                        if fr(to).1 == last {
                            for promo in [QUEEN, ROOK, BISHOP, KNIGHT] {
                                out.push(MMove { from, to, promo, ep: false, castle: false });
                            }
                        } else {
                            out.push(MMove { from, to, promo: 0, ep, castle: false });
                        }
                    };
                    if let Some(one) = idx(f, r + dir) {
                        if self.sq[one] == EMPTY {
                            add(&mut out, one, false);
                            if r == start {
                                let two = idx(f, r + 2 * dir).unwrap();
                                if self.sq[two] == EMPTY {
                                    push(&mut out, from, two);
                                }
                            }
                        }
                    }
                    for df in [-1, 1] {
                        if let Some(to) = idx(f + df, r + dir) {
                            if self.sq[to] != EMPTY && self.sq[to].signum() == -s {
                                add(&mut out, to, false);
                            } else if Some(to) == self.ep {
                                add(&mut out, to, true);
                            }
                        }
                    }
                }
                KNIGHT | KING => {
                    let steps = if p.abs() == KNIGHT { KNIGHT_STEPS } else { KING_STEPS };
                    for &(df, dr) in steps.iter() {
                        if let Some(to) = idx(f + df, r + dr) {
                            if self.sq[to] == EMPTY || self.sq[to].signum() == -s {
                                push(&mut out, from, to);
                            }
                        }
                    }
                }
                piece => {
                    let mut dirs = Vec::new();
                    if piece == ROOK || piece == QUEEN {
                        dirs.extend_from_slice(&ROOK_DIRS);
                    }
                    if piece == BISHOP || piece == QUEEN {
                        dirs.extend_from_slice(&BISHOP_DIRS);
                    }
                    for (df, dr) in dirs {
                        let (mut tf, mut tr) = (f + df, r + dr);
                        while let Some(to) = idx(tf, tr) {
                            if self.sq[to] == EMPTY {
                                push(&mut out, from, to);
                            } else {
                                if self.sq[to].signum() == -s {
                                    push(&mut out, from, to);
                                }
                                break;
                            }
                            tf += df;
                            tr += dr;
                        }
                    }
                }
            }
        }
        // castling
        let (rank, ks, qs) = if s > 0 { (0, 0, 1) } else { (7, 2, 3) };
        let e = idx(4, rank).unwrap();
        if self.sq[e] == s * KING && !self.attacked(e, -s) {
            if self.castle[ks]
                && self.sq[idx(7, rank).unwrap()] == s * ROOK
                && self.sq[idx(5, rank).unwrap()] == EMPTY
                && self.sq[idx(6, rank).unwrap()] == EMPTY
                && !self.attacked(idx(5, rank).unwrap(), -s)
                && !self.attacked(idx(6, rank).unwrap(), -s)
            {
                out.push(MMove { from: e, to: idx(6, rank).unwrap(), promo: 0, ep: false, castle: true });
            }
            if self.castle[qs]
                && self.sq[idx(0, rank).unwrap()] == s * ROOK
                && self.sq[idx(1, rank).unwrap()] == EMPTY
                && self.sq[idx(2, rank).unwrap()] == EMPTY
                && self.sq[idx(3, rank).unwrap()] == EMPTY
                && !self.attacked(idx(3, rank).unwrap(), -s)
                && !self.attacked(idx(2, rank).unwrap(), -s)
            {
                out.push(MMove { from: e, to: idx(2, rank).unwrap(), promo: 0, ep: false, castle: true });
            }
        }
        out
    }

    pub fn make(&self, m: &MMove) -> Board {
        let mut b = self.clone();
        let s = self.sign();
        let p = b.sq[m.from];
        b.sq[m.from] = EMPTY;
        if m.ep {
            let (tf, _) = fr(m.to);
            let (_, r) = fr(m.from);
            b.sq[idx(tf, r).unwrap()] = EMPTY;
        }
        b.sq[m.to] = if m.promo != 0 { s * m.promo } else { p };
        if m.castle {
            let (tf, r) = fr(m.to);
            let (rf, rt) = if tf == 6 { (7, 5) } else { (0, 3) };
            b.sq[idx(rt, r).unwrap()] = b.sq[idx(rf, r).unwrap()];
            b.sq[idx(rf, r).unwrap()] = EMPTY;
        }
        if p.abs() == KING {
            if s > 0 {
                b.castle[0] = false;
                b.castle[1] = false;
            } else {
                b.castle[2] = false;
                b.castle[3] = false;
            }
        }
        for sq in [m.from, m.to] {
            match sq {
                0 => b.castle[1] = false,
                7 => b.castle[0] = false,
                56 => b.castle[3] = false,
                63 => b.castle[2] = false,
                _ => {}
            }
        }
        b.ep = None;
        if p.abs() == PAWN && (fr(m.from).1 - fr(m.to).1).abs() == 2 {
            b.ep = idx(fr(m.from).0, (fr(m.from).1 + fr(m.to).1) / 2);
        }
        b.white_to_move = !b.white_to_move;
        b
    }

    pub fn legal(&self) -> Vec<MMove> {
        let s = self.sign();
        self.pseudo()
            .into_iter()
            .filter(|m| {
                let b = self.make(m);
                !b.attacked(b.king_square(s), -s)
            })
            .collect()
    }

    pub fn perft(&self, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        self.legal().iter().map(|m| self.make(m).perft(depth - 1)).sum()
    }

    /// Does the piece on `from` attack `target` on the current board?
    pub fn piece_attacks(&self, from: usize, target: usize) -> bool {
        let p = self.sq[from];
        if p == EMPTY || from == target {
            return false;
        }
        let (f, r) = fr(from);
        let (tf, tr) = fr(target);
        let (df, dr) = (tf - f, tr - r);
        match p.abs() {
            PAWN => dr == p.signum() as i32 && df.abs() == 1,
            KNIGHT => KNIGHT_STEPS.contains(&(df, dr)),
            KING => df.abs() <= 1 && dr.abs() <= 1,
            kind => {
                let straight = df == 0 || dr == 0;
                let diagonal = df.abs() == dr.abs();
                let ok = match kind {
                    ROOK => straight,
                    BISHOP => diagonal,
                    _ => straight || diagonal,
                };
                if !ok {
                    return false;
                }
                let (sf, sr) = (df.signum(), dr.signum());
                let (mut cf, mut cr) = (f + sf, r + sr);
                while (cf, cr) != (tf, tr) {
                    if self.sq[idx(cf, cr).unwrap()] != EMPTY {
                        return false;
                    }
                    cf += sf;
                    cr += sr;
                }
                true
            }
        }
    }

    /// All pieces of sign `by` that attack `target`, as (square, piece kind).
    pub fn attackers(&self, target: usize, by: i8) -> Vec<(usize, i8)> {
        (0..64)
            .filter(|&i| self.sq[i] != EMPTY && self.sq[i].signum() == by && self.piece_attacks(i, target))
            .map(|i| (i, self.sq[i].abs()))
            .collect()
    }
}

pub fn value(kind: i8) -> i32 {
    match kind {
        PAWN => 1,
        KNIGHT | BISHOP => 3,
        ROOK => 5,
        QUEEN => 9,
        _ => 0,
    }
}
