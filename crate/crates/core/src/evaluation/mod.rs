//! Scoring sacrifices against an engine: the logistic link between
//! centipawns and win probability, centipawn loss of the played move, and
//! the optimal/sub-optimal verdict.

mod pool;
mod report;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::chess::{Color, GameRecord, Move};
use crate::engine::{start_engine, EngineConfig, EngineError, EngineSession, Limits, NormalizedScore};
use crate::sacrifice::{detect_sacrifices, DetectorConfig, SacrificeEvent};

pub use report::{
    reproduce_tables, Fraction, ReportRow, Reproduction, ReproduceOptions, RowOutcome, TableReport,
};

/// Default tolerance, in pawns, below which a loss still counts as optimal.
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Optimal,
    Suboptimal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Optimal => "optimal",
            Verdict::Suboptimal => "suboptimal",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Win probability for an advantage of `c` pawns.
pub fn win_probability(c: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-c / 4.0))
}

#[derive(Copy, Clone, Debug, PartialEq, Error)]
pub enum ConversionError {
    #[error("win probability {0} has no finite centipawn equivalent")]
    Infinite(f64),
    #[error("win probability {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// Pawn advantage for a win probability; the inverse of [`win_probability`].
pub fn centipawn_advantage(w: f64) -> Result<f64, ConversionError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(ConversionError::OutOfRange(w));
    }
    if w == 0.0 || w == 1.0 {
        return Err(ConversionError::Infinite(w));
    }
    Ok(4.0 * (w / (1.0 - w)).log10())
}

/// Win probability of a score for `color`. Mates are certain.
pub fn score_win_probability(score: NormalizedScore, color: Color) -> f64 {
    let s = score.for_color(color);
    if s.is_mate() {
        if s.value > 0 {
            1.0
        } else {
            0.0
        }
    } else {
        win_probability(s.value as f64 / 100.0)
    }
}

/// Loss in whole centipawns of `played` against `best`, for the mover.
pub fn centipawn_loss_cp(best: NormalizedScore, played: NormalizedScore, mover: Color) -> i32 {
    (best.for_color(mover).as_cp() - played.for_color(mover).as_cp()).max(0)
}

/// Loss in pawns of `played` against `best`, for the mover.
pub fn centipawn_loss(best: NormalizedScore, played: NormalizedScore, mover: Color) -> f64 {
    centipawn_loss_cp(best, played, mover) as f64 / 100.0
}

pub fn verdict(loss: f64, epsilon: f64) -> Verdict {
    if loss <= epsilon {
        Verdict::Optimal
    } else {
        Verdict::Suboptimal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityVerdict {
    pub event: SacrificeEvent,
    pub best_move: Move,
    pub best_score: NormalizedScore,
    pub played_score: NormalizedScore,
    /// Pawns.
    pub cp_loss: f64,
    pub win_prob_drop: f64,
    pub verdict: Verdict,
    pub epsilon_used: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameAnalysis {
    pub game_id: String,
    pub verdicts: Vec<OptimalityVerdict>,
    pub engine_id: String,
    pub limits: Limits,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub detector: DetectorConfig,
    pub limits: Limits,
    pub epsilon: f64,
}

impl Default for AnalysisConfig {
    fn default() -> AnalysisConfig {
        AnalysisConfig {
            detector: DetectorConfig::default(),
            limits: Limits::depth(20),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Error)]
#[error("{game_id}, ply {ply}: {source}")]
pub struct AnalysisError {
    pub game_id: String,
    pub ply: usize,
    #[source]
    pub source: EngineError,
}

/// Scores one event: the engine's best line at the pre-move position
/// against a search restricted to the move actually played.
pub fn score_event(
    session: &mut EngineSession,
    game: &GameRecord,
    event: &SacrificeEvent,
    cfg: &AnalysisConfig,
) -> Result<OptimalityVerdict, AnalysisError> {
    let wrap = |source| AnalysisError {
        game_id: event.game_id.clone(),
        ply: event.ply,
        source,
    };
    let pos = game.positions()[event.ply];
    let eval = session.evaluate_position(&pos, &cfg.limits).map_err(wrap)?;
    let played = session.evaluate_move(&pos, &event.mv, &cfg.limits).map_err(wrap)?;
    let best = eval.best();
    let cp_loss = centipawn_loss(best.score, played, event.mover);
    let drop = score_win_probability(best.score, event.mover) - score_win_probability(played, event.mover);
    Ok(OptimalityVerdict {
        event: event.clone(),
        best_move: best.mv,
        best_score: best.score,
        played_score: played,
        cp_loss,
        win_prob_drop: drop.max(0.0),
        verdict: verdict(cp_loss, cfg.epsilon),
        epsilon_used: cfg.epsilon,
    })
}

/// Detects the sacrifices in `game` that `keep` accepts and scores each.
pub fn analyze_game_filtered(
    session: &mut EngineSession,
    game: &GameRecord,
    cfg: &AnalysisConfig,
    keep: impl Fn(&SacrificeEvent) -> bool,
) -> Result<GameAnalysis, AnalysisError> {
    let events: Vec<SacrificeEvent> = detect_sacrifices(game, &cfg.detector).into_iter().filter(|e| keep(e)).collect();
    if !events.is_empty() {
        session.new_game().map_err(|source| AnalysisError {
            game_id: game.id(),
            ply: events[0].ply,
            source,
        })?;
    }
    let verdicts = events
        .iter()
        .map(|e| score_event(session, game, e, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GameAnalysis {
        game_id: game.id(),
        verdicts,
        engine_id: session.engine_id().to_string(),
        limits: cfg.limits,
    })
}

pub fn analyze_game(session: &mut EngineSession, game: &GameRecord, cfg: &AnalysisConfig) -> Result<GameAnalysis, AnalysisError> {
    analyze_game_filtered(session, game, cfg, |_| true)
}

/// Analyses `games` on up to `jobs` sessions of the engine. Results come
/// back in input order; a game whose analysis fails does not stop the rest.
/// Only failing to start the first session is reported as a whole.
pub fn analyze_games(
    games: &[GameRecord],
    engine: &EngineConfig,
    cfg: &AnalysisConfig,
    jobs: usize,
) -> Result<Vec<Result<GameAnalysis, AnalysisError>>, EngineError> {
    let first = start_engine(engine)?;
    Ok(pool::pooled(
        engine,
        first,
        games,
        jobs,
        |session, game| match analyze_game(session, game, cfg) {
            Ok(a) => Ok(Ok(a)),
            Err(e) => Err(Err(e)),
        },
        |game, source| {
            Err(AnalysisError {
                game_id: game.id(),
                ply: 0,
                source,
            })
        },
    ))
}
