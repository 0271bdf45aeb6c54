//! Material accounting and static exchange evaluation.
//!
//! Piece values are fixed: P=1, N=3, B=3, R=5, Q=9, king excluded.

use super::position::Position;
use super::types::{Bitboard, Color, Move, MoveKind, Role, Square};

/// White material minus black material, in pawns.
pub fn material_balance(pos: &Position) -> i32 {
    Role::ALL
        .iter()
        .map(|&role| {
            let diff = pos.pieces(Color::White, role).count() as i32
                - pos.pieces(Color::Black, role).count() as i32;
            diff * role.value()
        })
        .sum()
}

/// Material of one side in pawns.
pub fn material_of(pos: &Position, color: Color) -> i32 {
    Role::ALL
        .iter()
        .map(|&role| pos.pieces(color, role).count() as i32 * role.value())
        .sum()
}

fn least_valuable(pos: &Position, attackers: Bitboard) -> Option<(Square, Role)> {
    Role::ALL.into_iter().find_map(|role| {
        (attackers & pos.by_role(role))
            .lsb()
            .map(|sq| (sq, role))
    })
}

fn exchange_start(pos: &Position, m: &Move) -> Option<(Bitboard, i32, Role)> {
    let piece = pos.piece_at(m.from)?;
    let mut occupied = pos.occupied().without(m.from);
    let victim = match m.kind {
        MoveKind::EnPassant => {
            let victim_sq = m
                .to
                .offset(0, pos.side_to_move().fold(-1, 1))
                .expect("en passant victim on board");
            occupied = occupied.without(victim_sq);
            Role::Pawn.value()
        }
        _ => pos.captured_piece(m).map_or(0, |p| p.role.value()),
    };
    let promo_bonus = m.promotion.map_or(0, |r| r.value() - Role::Pawn.value());
    Some((occupied, victim + promo_bonus, m.promotion.unwrap_or(piece.role)))
}

fn king_may_take(pos: &Position, to: Square, occupied: Bitboard, king_sq: Square, side: Color) -> bool {
    let after = occupied.without(king_sq);
    (pos.attackers_to(to, after) & after & pos.by_color(!side)).is_empty()
}

/// Value of the best capture sequence on the target square of `m`, from the
/// mover's point of view, in pawns.
///
/// After `m` each side in turn may recapture on the square with any attacker
/// or stop. Every attacker choice is searched, so x-rays opened by one
/// recapture are weighed against the others. Pins are ignored and a king only
/// recaptures onto an undefended square.
pub fn static_exchange_eval(pos: &Position, m: &Move) -> i32 {
    let Some((occupied, gained, on_square)) = exchange_start(pos, m) else {
        return 0;
    };
    gained - best_recapture(pos, m.to, occupied, on_square.value(), !pos.side_to_move())
}

// Best net gain for `side` from continuing the exchange, never below zero.
fn best_recapture(pos: &Position, to: Square, occupied: Bitboard, on_square: i32, side: Color) -> i32 {
    let mut best = 0;
    let attackers = pos.attackers_to(to, occupied) & occupied & pos.by_color(side);
    for sq in attackers {
        if best >= on_square {
            break;
        }
        let role = pos.piece_at(sq).expect("attacker on board").role;
        if role == Role::King && !king_may_take(pos, to, occupied, sq, side) {
            continue;
        }
        let reply = best_recapture(pos, to, occupied.without(sq), role.value(), !side);
        best = best.max(on_square - reply);
    }
    best
}

/// Classic swap algorithm: recaptures always use the least valuable
/// attacker. Cheaper than [`static_exchange_eval`] and equal to it unless a
/// recapture uncovers an x-ray for the other side.
pub fn swap_exchange_eval(pos: &Position, m: &Move) -> i32 {
    let Some((mut occupied, gained, mut on_square)) = exchange_start(pos, m) else {
        return 0;
    };
    let to = m.to;
    let mut gain = [0i32; 34];
    gain[0] = gained;
    let mut depth = 0;
    let mut side = !pos.side_to_move();

    loop {
        let attackers = pos.attackers_to(to, occupied) & occupied & pos.by_color(side);
        let Some((sq, role)) = least_valuable(pos, attackers) else {
            break;
        };
        if role == Role::King && !king_may_take(pos, to, occupied, sq, side) {
            break;
        }
        depth += 1;
        gain[depth] = on_square.value() - gain[depth - 1];
        on_square = role;
        occupied = occupied.without(sq);
        side = !side;
    }

    while depth > 0 {
        gain[depth - 1] = -(-gain[depth - 1]).max(gain[depth]);
        depth -= 1;
    }
    gain[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::fen::parse_fen;
    use crate::chess::san::parse_san;

    fn see(fen: &str, san: &str) -> i32 {
        let pos = parse_fen(fen).unwrap();
        let m = parse_san(&pos, san).unwrap();
        static_exchange_eval(&pos, &m)
    }

    #[test]
    fn start_is_balanced() {
        assert_eq!(material_balance(&Position::startpos()), 0);
        assert_eq!(material_of(&Position::startpos(), Color::White), 39);
    }

    #[test]
    fn queen_against_two_knights_balance() {
        let pos = parse_fen("7Q/5kpp/5n2/4n1B1/4q3/5R2/PP4KP/R7 w - - 0 1").unwrap();
        // white Q+R+R+B+3P, black Q+N+N+2P
        assert_eq!(material_of(&pos, Color::White), 9 + 5 + 5 + 3 + 3);
        assert_eq!(material_of(&pos, Color::Black), 9 + 3 + 3 + 2);
        assert_eq!(material_balance(&pos), 8);
    }

    #[test]
    fn pawn_takes_undefended_queen() {
        assert_eq!(see("4k3/8/8/3q4/4P3/8/8/4K3 w - - 0 1", "exd5"), 9);
    }

    #[test]
    fn queen_takes_defended_pawn() {
        assert_eq!(see("4k3/8/2p5/3p4/8/8/8/3QK3 w - - 0 1", "Qxd5"), -8);
    }

    #[test]
    fn xray_recapture() {
        // Rook takes pawn defended by rook; second rook behind backs it up.
        assert_eq!(see("3rk3/8/8/3p4/8/8/3R4/3RK3 w - - 0 1", "Rxd5"), 1);
        // Without the battery the exchange loses the rook.
        assert_eq!(see("3rk3/8/8/3p4/8/8/3R4/4K3 w - - 0 1", "Rxd5"), -4);
    }

    #[test]
    fn king_cannot_recapture_defended_square() {
        assert_eq!(see("8/8/8/3k4/8/8/1Q6/B3K3 w - - 0 1", "Qd4+"), 0);
        assert_eq!(see("8/8/8/3k4/8/8/1Q6/4K3 w - - 0 1", "Qd4+"), -9);
    }

    #[test]
    fn recapture_that_opens_an_xray_is_avoided() {
        // After ...c6, bxc6 bxc6 would let the a8 bishop join in, so black
        // recaptures with the rook instead and the pawn push costs nothing.
        let fen = "B1rk1r2/1pp2Bp1/1b4Qp/1P4nn/3p3P/5N1b/P7/R3K3 b - - 0 22";
        assert_eq!(see(fen, "c6"), 0);
        let pos = parse_fen(fen).unwrap();
        let m = parse_san(&pos, "c6").unwrap();
        assert_eq!(swap_exchange_eval(&pos, &m), -1);
    }
}
