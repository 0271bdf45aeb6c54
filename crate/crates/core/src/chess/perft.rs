use super::position::Position;
use super::types::Move;
use crate::par::{self, Parallelism};

/// Leaf count of the legal move tree, splitting root moves across threads.
pub fn perft(pos: &Position, depth: u32) -> u64 {
    perft_with(pos, depth, Parallelism::default())
}

pub fn perft_with(pos: &Position, depth: u32, mode: Parallelism) -> u64 {
    if depth <= 1 {
        return perft_sequential(pos, depth);
    }
    let moves = pos.legal_moves();
    par::sum_slice(&moves, mode, |m| perft_sequential(&pos.play_unchecked(m), depth - 1))
}

fn perft_sequential(pos: &Position, depth: u32) -> u64 {
    match depth {
        0 => 1,
        1 => pos.count_legal_moves() as u64,
        _ => pos
            .legal_moves()
            .iter()
            .map(|m| perft_sequential(&pos.play_unchecked(m), depth - 1))
            .sum(),
    }
}

/// Per-root-move leaf counts, in generation order.
pub fn divide(pos: &Position, depth: u32, mode: Parallelism) -> Vec<(Move, u64)> {
    let moves = pos.legal_moves();
    let counts = par::map_slice(&moves, mode, |m| {
        perft_sequential(&pos.play_unchecked(m), depth.saturating_sub(1))
    });
    moves.into_iter().zip(counts).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shallow_start_counts() {
        let pos = Position::startpos();
        assert_eq!(perft(&pos, 0), 1);
        assert_eq!(perft(&pos, 1), 20);
        assert_eq!(perft(&pos, 2), 400);
        assert_eq!(perft_with(&pos, 3, Parallelism::Sequential), 8902);
    }

    #[test]
    fn divide_sums_to_perft() {
        let pos = Position::startpos();
        let total: u64 = divide(&pos, 3, Parallelism::Parallel).iter().map(|(_, n)| n).sum();
        assert_eq!(total, 8902);
    }
}
