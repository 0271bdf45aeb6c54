use std::fmt;

use thiserror::Error;

use super::attacks::{
    between, bishop_attacks, king_attacks, knight_attacks, pawn_attacks, queen_attacks,
    rook_attacks,
};
use super::types::{Bitboard, Color, Move, MoveKind, Piece, Role, Square};

/// Castling rights as four flags: `K`, `Q`, `k`, `q`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CastlingRights(u8);

impl CastlingRights {
    pub const NONE: CastlingRights = CastlingRights(0);
    pub const ALL: CastlingRights = CastlingRights(0b1111);

    fn bit(color: Color, king_side: bool) -> u8 {
        match (color, king_side) {
            (Color::White, true) => 1,
            (Color::White, false) => 2,
            (Color::Black, true) => 4,
            (Color::Black, false) => 8,
        }
    }

    pub fn has(self, color: Color, king_side: bool) -> bool {
        self.0 & Self::bit(color, king_side) != 0
    }

    pub fn set(&mut self, color: Color, king_side: bool, value: bool) {
        let bit = Self::bit(color, king_side);
        if value {
            self.0 |= bit;
        } else {
            self.0 &= !bit;
        }
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    fn mirrored(self) -> CastlingRights {
        CastlingRights((self.0 & 0b0011) << 2 | (self.0 & 0b1100) >> 2)
    }
}

impl fmt::Display for CastlingRights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        for (color, king_side, c) in [
            (Color::White, true, 'K'),
            (Color::White, false, 'Q'),
            (Color::Black, true, 'k'),
            (Color::Black, false, 'q'),
        ] {
            if self.has(color, king_side) {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

/// Reasons a board setup violates the rules of chess.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PositionError {
    #[error("{0} has no king")]
    MissingKing(Color),
    #[error("{0} has more than one king")]
    TooManyKings(Color),
    #[error("{0} has more than 8 pawns")]
    TooManyPawns(Color),
    #[error("{0} has more than 16 pieces")]
    TooManyPieces(Color),
    #[error("{0} has more promoted pieces than missing pawns allow")]
    ImpossiblePromotions(Color),
    #[error("pawn on the first or last rank")]
    PawnOnBackRank,
    #[error("the side not to move is in check")]
    OppositeCheck,
    #[error("en passant square {0} is inconsistent with the board")]
    InvalidEnPassant(Square),
    #[error("castling right {0} is inconsistent with king and rook placement")]
    InvalidCastling(char),
    #[error("fullmove number must be at least 1")]
    InvalidFullmove,
}

/// Rejection of a move that is not legal in the position.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("illegal move {mv} in position {fen}")]
pub struct IllegalMove {
    pub mv: String,
    pub fen: String,
}

/// How the game stands in a position, ignoring history-dependent draws.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Ongoing,
    Checkmate { winner: Color },
    Stalemate,
    InsufficientMaterial,
}

/// Full board state: placement, side to move, castling, en passant and clocks.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Position {
    by_color: [Bitboard; 2],
    by_role: [Bitboard; 6],
    side_to_move: Color,
    castling: CastlingRights,
    ep_square: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
}

/// Position identity for repetition counting (clocks excluded).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct RepetitionKey {
    by_color: [Bitboard; 2],
    by_role: [Bitboard; 6],
    side_to_move: Color,
    castling: CastlingRights,
    ep_square: Option<Square>,
}

impl Default for Position {
    fn default() -> Self {
        Position::startpos()
    }
}

const BACK_RANK: [Role; 8] = [
    Role::Rook,
    Role::Knight,
    Role::Bishop,
    Role::Queen,
    Role::King,
    Role::Bishop,
    Role::Knight,
    Role::Rook,
];

impl Position {
    pub fn startpos() -> Position {
        let mut pieces = Vec::with_capacity(32);
        for file in 0..8u8 {
            pieces.push((Square::from_coords(file, 0), Piece::new(Color::White, BACK_RANK[file as usize])));
            pieces.push((Square::from_coords(file, 1), Piece::new(Color::White, Role::Pawn)));
            pieces.push((Square::from_coords(file, 6), Piece::new(Color::Black, Role::Pawn)));
            pieces.push((Square::from_coords(file, 7), Piece::new(Color::Black, BACK_RANK[file as usize])));
        }
        Position::from_parts(pieces, Color::White, CastlingRights::ALL, None, 0, 1)
            .expect("start position is valid")
    }

    /// Builds and validates a position.
    pub fn from_parts(
        pieces: impl IntoIterator<Item = (Square, Piece)>,
        side_to_move: Color,
        castling: CastlingRights,
        ep_square: Option<Square>,
        halfmove_clock: u32,
        fullmove_number: u32,
    ) -> Result<Position, PositionError> {
        let pos = Position::from_parts_unchecked(
            pieces,
            side_to_move,
            castling,
            ep_square,
            halfmove_clock,
            fullmove_number,
        );
        pos.validate()?;
        Ok(pos)
    }

    /// Builds a position without checking the rules. Callers must validate.
    pub fn from_parts_unchecked(
        pieces: impl IntoIterator<Item = (Square, Piece)>,
        side_to_move: Color,
        castling: CastlingRights,
        ep_square: Option<Square>,
        halfmove_clock: u32,
        fullmove_number: u32,
    ) -> Position {
        let mut pos = Position {
            by_color: [Bitboard::EMPTY; 2],
            by_role: [Bitboard::EMPTY; 6],
            side_to_move,
            castling,
            ep_square,
            halfmove_clock,
            fullmove_number,
        };
        for (sq, piece) in pieces {
            pos.remove(sq);
            pos.put(sq, piece);
        }
        pos
    }

    /// Checks every board invariant.
    pub fn validate(&self) -> Result<(), PositionError> {
        for color in Color::ALL {
            let kings = self.pieces(color, Role::King).count();
            if kings == 0 {
                return Err(PositionError::MissingKing(color));
            }
            if kings > 1 {
                return Err(PositionError::TooManyKings(color));
            }
            let pawns = self.pieces(color, Role::Pawn).count() as i32;
            if pawns > 8 {
                return Err(PositionError::TooManyPawns(color));
            }
            if self.by_color[color.index()].count() > 16 {
                return Err(PositionError::TooManyPieces(color));
            }
            let extra = |role: Role, base: i32| (self.pieces(color, role).count() as i32 - base).max(0);
            let promoted = extra(Role::Queen, 1)
                + extra(Role::Rook, 2)
                + extra(Role::Bishop, 2)
                + extra(Role::Knight, 2);
            if promoted > 8 - pawns {
                return Err(PositionError::ImpossiblePromotions(color));
            }
        }
        if (self.by_role[Role::Pawn.index()] & (Bitboard::rank(0) | Bitboard::rank(7))).any() {
            return Err(PositionError::PawnOnBackRank);
        }
        if self.fullmove_number == 0 {
            return Err(PositionError::InvalidFullmove);
        }
        for (color, king_side, c) in [
            (Color::White, true, 'K'),
            (Color::White, false, 'Q'),
            (Color::Black, true, 'k'),
            (Color::Black, false, 'q'),
        ] {
            if self.castling.has(color, king_side) && !self.castling_setup_ok(color, king_side) {
                return Err(PositionError::InvalidCastling(c));
            }
        }
        if let Some(ep) = self.ep_square {
            if !self.ep_square_ok(ep) {
                return Err(PositionError::InvalidEnPassant(ep));
            }
        }
        let them = !self.side_to_move;
        if self.is_attacked(self.king_of(them), self.side_to_move) {
            return Err(PositionError::OppositeCheck);
        }
        Ok(())
    }

    pub(crate) fn castling_setup_ok(&self, color: Color, king_side: bool) -> bool {
        let rank = color.fold(0, 7);
        let king_sq = Square::from_coords(4, rank);
        let rook_sq = Square::from_coords(if king_side { 7 } else { 0 }, rank);
        self.piece_at(king_sq) == Some(Piece::new(color, Role::King))
            && self.piece_at(rook_sq) == Some(Piece::new(color, Role::Rook))
    }

    pub(crate) fn ep_square_ok(&self, ep: Square) -> bool {
        // The side that just moved is the opponent of the side to move.
        let mover = !self.side_to_move;
        let (ep_rank, dr) = mover.fold((2u8, 1i32), (5u8, -1i32));
        if ep.rank() != ep_rank {
            return false;
        }
        let (Some(pawn_sq), Some(origin)) = (ep.offset(0, dr), ep.offset(0, -dr)) else {
            return false;
        };
        self.piece_at(pawn_sq) == Some(Piece::new(mover, Role::Pawn))
            && self.piece_at(ep).is_none()
            && self.piece_at(origin).is_none()
    }

    // --- accessors ---

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    #[inline]
    pub fn castling_rights(&self) -> CastlingRights {
        self.castling
    }

    #[inline]
    pub fn ep_square(&self) -> Option<Square> {
        self.ep_square
    }

    #[inline]
    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    #[inline]
    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub fn set_clocks(&mut self, halfmove_clock: u32, fullmove_number: u32) {
        self.halfmove_clock = halfmove_clock;
        self.fullmove_number = fullmove_number.max(1);
    }

    #[inline]
    pub fn occupied(&self) -> Bitboard {
        self.by_color[0] | self.by_color[1]
    }

    #[inline]
    pub fn by_color(&self, color: Color) -> Bitboard {
        self.by_color[color.index()]
    }

    #[inline]
    pub fn by_role(&self, role: Role) -> Bitboard {
        self.by_role[role.index()]
    }

    #[inline]
    pub fn pieces(&self, color: Color, role: Role) -> Bitboard {
        self.by_color[color.index()] & self.by_role[role.index()]
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        let color = if self.by_color[0].contains(sq) {
            Color::White
        } else if self.by_color[1].contains(sq) {
            Color::Black
        } else {
            return None;
        };
        let role = Role::ALL
            .into_iter()
            .find(|r| self.by_role[r.index()].contains(sq))?;
        Some(Piece::new(color, role))
    }

    /// All pieces on the board in square order.
    pub fn board(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        self.occupied()
            .map(move |sq| (sq, self.piece_at(sq).expect("occupied square")))
    }

    #[inline]
    pub fn king_of(&self, color: Color) -> Square {
        self.pieces(color, Role::King)
            .lsb()
            .expect("position has a king per color")
    }

    pub fn repetition_key(&self) -> RepetitionKey {
        RepetitionKey {
            by_color: self.by_color,
            by_role: self.by_role,
            side_to_move: self.side_to_move,
            castling: self.castling,
            ep_square: self.ep_square,
        }
    }

    fn put(&mut self, sq: Square, piece: Piece) {
        self.by_color[piece.color.index()] |= sq.bb();
        self.by_role[piece.role.index()] |= sq.bb();
    }

    fn remove(&mut self, sq: Square) {
        let mask = !sq.bb();
        for bb in self.by_color.iter_mut().chain(self.by_role.iter_mut()) {
            *bb &= mask;
        }
    }

    // --- attacks ---

    /// Pieces of both colors attacking `sq` given occupancy `occupied`.
    pub fn attackers_to(&self, sq: Square, occupied: Bitboard) -> Bitboard {
        let rooks = self.by_role(Role::Rook) | self.by_role(Role::Queen);
        let bishops = self.by_role(Role::Bishop) | self.by_role(Role::Queen);
        (knight_attacks(sq) & self.by_role(Role::Knight))
            | (king_attacks(sq) & self.by_role(Role::King))
            | (pawn_attacks(Color::White, sq) & self.pieces(Color::Black, Role::Pawn))
            | (pawn_attacks(Color::Black, sq) & self.pieces(Color::White, Role::Pawn))
            | (rook_attacks(sq, occupied) & rooks)
            | (bishop_attacks(sq, occupied) & bishops)
    }

    /// Is `sq` attacked by any piece of color `by`?
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        (self.attackers_to(sq, self.occupied()) & self.by_color(by)).any()
    }

    pub fn checkers(&self) -> Bitboard {
        let king = self.king_of(self.side_to_move);
        self.attackers_to(king, self.occupied()) & self.by_color(!self.side_to_move)
    }

    pub fn in_check(&self) -> bool {
        self.checkers().any()
    }

    fn attacks_from(&self, sq: Square, piece: Piece, occupied: Bitboard) -> Bitboard {
        match piece.role {
            Role::Pawn => pawn_attacks(piece.color, sq),
            Role::Knight => knight_attacks(sq),
            Role::Bishop => bishop_attacks(sq, occupied),
            Role::Rook => rook_attacks(sq, occupied),
            Role::Queen => queen_attacks(sq, occupied),
            Role::King => king_attacks(sq),
        }
    }

    // --- move generation ---

    fn pseudo_moves(&self, out: &mut Vec<Move>) {
        let us = self.side_to_move;
        let them = !us;
        let own = self.by_color(us);
        let enemy = self.by_color(them);
        let occ = self.occupied();

        let dr = us.fold(1, -1);
        let start_rank = us.fold(1, 6);
        let last_rank = us.fold(7, 0);
        for from in self.pieces(us, Role::Pawn) {
            let push_pawn = |to: Square, capture: bool, out: &mut Vec<Move>| {
                if to.rank() == last_rank {
                    for promo in [Role::Queen, Role::Rook, Role::Bishop, Role::Knight] {
                        out.push(Move {
                            from,
                            to,
                            promotion: Some(promo),
                            kind: MoveKind::Promotion,
                        });
                    }
                } else {
                    let kind = if capture {
                        MoveKind::Capture
                    } else {
                        MoveKind::Normal
                    };
                    out.push(Move::new(from, to, kind));
                }
            };
            if let Some(one) = from.offset(0, dr) {
                if !occ.contains(one) {
                    push_pawn(one, false, out);
                    if from.rank() == start_rank {
                        let two = one.offset(0, dr).expect("double push stays on board");
                        if !occ.contains(two) {
                            out.push(Move::new(from, two, MoveKind::Normal));
                        }
                    }
                }
            }
            for to in pawn_attacks(us, from) & enemy {
                push_pawn(to, true, out);
            }
            if let Some(ep) = self.ep_square {
                if pawn_attacks(us, from).contains(ep) {
                    out.push(Move::new(from, ep, MoveKind::EnPassant));
                }
            }
        }

        for role in [Role::Knight, Role::Bishop, Role::Rook, Role::Queen, Role::King] {
            for from in self.pieces(us, role) {
                let targets = self.attacks_from(from, Piece::new(us, role), occ) & !own;
                for to in targets {
                    let kind = if enemy.contains(to) {
                        MoveKind::Capture
                    } else {
                        MoveKind::Normal
                    };
                    out.push(Move::new(from, to, kind));
                }
            }
        }

        // Castling: rights imply king and rook on their home squares.
        let rank = us.fold(0, 7);
        let king_sq = Square::from_coords(4, rank);
        if (self.castling.has(us, true) || self.castling.has(us, false))
            && self.is_attacked(king_sq, them) {
                return;
            }
        for king_side in [true, false] {
            if !self.castling.has(us, king_side) || !self.castling_setup_ok(us, king_side) {
                continue;
            }
            let rook_sq = Square::from_coords(if king_side { 7 } else { 0 }, rank);
            if (between(king_sq, rook_sq) & occ).any() {
                continue;
            }
            let (pass, dest) = if king_side {
                (Square::from_coords(5, rank), Square::from_coords(6, rank))
            } else {
                (Square::from_coords(3, rank), Square::from_coords(2, rank))
            };
            if self.is_attacked(pass, them) || self.is_attacked(dest, them) {
                continue;
            }
            out.push(Move::new(king_sq, dest, MoveKind::Castle));
        }
    }

    /// Does this pseudo-legal move leave the mover's own king safe?
    fn keeps_king_safe(&self, m: &Move) -> bool {
        if m.kind == MoveKind::Castle {
            return true;
        }
        let after = self.play_unchecked(m);
        !after.is_attacked(after.king_of(self.side_to_move), !self.side_to_move)
    }

    /// All legal moves in generation order.
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut moves = Vec::with_capacity(48);
        self.pseudo_moves(&mut moves);
        moves.retain(|m| self.keeps_king_safe(m));
        moves
    }

    /// Legal moves that capture material (including en passant).
    pub fn legal_captures(&self) -> Vec<Move> {
        let mut moves = self.legal_moves();
        moves.retain(|m| self.is_capture(m));
        moves
    }

    pub fn has_legal_move(&self) -> bool {
        let mut moves = Vec::with_capacity(48);
        self.pseudo_moves(&mut moves);
        moves.iter().any(|m| self.keeps_king_safe(m))
    }

    pub fn count_legal_moves(&self) -> usize {
        let mut moves = Vec::with_capacity(48);
        self.pseudo_moves(&mut moves);
        moves.iter().filter(|m| self.keeps_king_safe(m)).count()
    }

    pub fn is_legal(&self, m: &Move) -> bool {
        self.legal_moves().contains(m)
    }

    pub fn is_capture(&self, m: &Move) -> bool {
        m.kind == MoveKind::EnPassant || self.by_color(!self.side_to_move).contains(m.to)
    }

    /// The piece removed by `m`, if any.
    pub fn captured_piece(&self, m: &Move) -> Option<Piece> {
        if m.kind == MoveKind::EnPassant {
            Some(Piece::new(!self.side_to_move, Role::Pawn))
        } else {
            self.piece_at(m.to).filter(|p| p.color != self.side_to_move)
        }
    }

    /// Applies a legal move. Illegal moves are rejected.
    pub fn apply_move(&self, m: &Move) -> Result<Position, IllegalMove> {
        if self.is_legal(m) {
            Ok(self.play_unchecked(m))
        } else {
            Err(IllegalMove {
                mv: m.to_uci(),
                fen: super::fen::emit_fen(self),
            })
        }
    }

    /// Applies a move known to be pseudo-legal for this position.
    pub fn play_unchecked(&self, m: &Move) -> Position {
        let mut next = *self;
        let us = self.side_to_move;
        let piece = self.piece_at(m.from).expect("move starts on a piece");
        let capture = self.captured_piece(m);

        next.remove(m.from);
        if m.kind == MoveKind::EnPassant {
            let victim = m.to.offset(0, us.fold(-1, 1)).expect("ep victim on board");
            next.remove(victim);
        } else {
            next.remove(m.to);
        }
        let placed = Piece::new(us, m.promotion.unwrap_or(piece.role));
        next.put(m.to, placed);

        if m.kind == MoveKind::Castle {
            let rank = m.from.rank();
            let (rook_from, rook_to) = if m.to.file() == 6 {
                (Square::from_coords(7, rank), Square::from_coords(5, rank))
            } else {
                (Square::from_coords(0, rank), Square::from_coords(3, rank))
            };
            next.remove(rook_from);
            next.put(rook_to, Piece::new(us, Role::Rook));
        }

        if piece.role == Role::King {
            next.castling.set(us, true, false);
            next.castling.set(us, false, false);
        }
        for sq in [m.from, m.to] {
            match (sq.file(), sq.rank()) {
                (0, 0) => next.castling.set(Color::White, false, false),
                (7, 0) => next.castling.set(Color::White, true, false),
                (0, 7) => next.castling.set(Color::Black, false, false),
                (7, 7) => next.castling.set(Color::Black, true, false),
                _ => {}
            }
        }

        next.ep_square = None;
        if piece.role == Role::Pawn && m.from.rank().abs_diff(m.to.rank()) == 2 {
            next.ep_square = m.from.offset(0, us.fold(1, -1));
        }

        next.halfmove_clock = if piece.role == Role::Pawn || capture.is_some() {
            0
        } else {
            self.halfmove_clock + 1
        };
        if us == Color::Black {
            next.fullmove_number += 1;
        }
        next.side_to_move = !us;
        next
    }

    // --- game state ---

    /// True when neither side can possibly deliver mate.
    pub fn is_insufficient_material(&self) -> bool {
        let heavy = self.by_role(Role::Pawn) | self.by_role(Role::Rook) | self.by_role(Role::Queen);
        if heavy.any() {
            return false;
        }
        let knights = self.by_role(Role::Knight).count();
        let bishops = self.by_role(Role::Bishop);
        if knights + bishops.count() <= 1 {
            return true;
        }
        if knights == 0 {
            const DARK: u64 = 0xAA55_AA55_AA55_AA55;
            let on_dark = bishops.0 & DARK;
            return on_dark == 0 || on_dark == bishops.0;
        }
        false
    }

    pub fn status(&self) -> Status {
        if !self.has_legal_move() {
            if self.in_check() {
                Status::Checkmate {
                    winner: !self.side_to_move,
                }
            } else {
                Status::Stalemate
            }
        } else if self.is_insufficient_material() {
            Status::InsufficientMaterial
        } else {
            Status::Ongoing
        }
    }

    pub fn is_checkmate(&self) -> bool {
        matches!(self.status(), Status::Checkmate { .. })
    }

    pub fn is_stalemate(&self) -> bool {
        self.status() == Status::Stalemate
    }

    /// Colors swapped and ranks mirrored; the result is the same game seen
    /// from the other side.
    pub fn mirrored(&self) -> Position {
        let flip = |bb: Bitboard| Bitboard(bb.0.swap_bytes());
        Position {
            by_color: [flip(self.by_color[1]), flip(self.by_color[0])],
            by_role: self.by_role.map(flip),
            side_to_move: !self.side_to_move,
            castling: self.castling.mirrored(),
            ep_square: self.ep_square.map(Square::flip_vertical),
            halfmove_clock: self.halfmove_clock,
            fullmove_number: self.fullmove_number,
        }
    }

    /// Piece placement mapped square by square. Only valid for setups where
    /// castling and en passant are absent and pawns are not moved off legal ranks.
    pub fn map_squares(&self, f: impl Fn(Square) -> Square) -> Position {
        let pieces: Vec<(Square, Piece)> = self.board().map(|(sq, p)| (f(sq), p)).collect();
        Position::from_parts_unchecked(
            pieces,
            self.side_to_move,
            CastlingRights::NONE,
            None,
            self.halfmove_clock,
            self.fullmove_number,
        )
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::fen::emit_fen(self))
    }
}
