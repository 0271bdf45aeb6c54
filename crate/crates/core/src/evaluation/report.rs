//! Table reproduction and its renderings.

use std::fmt::{self, Write as _};

use serde::Serialize;
use serde_json::json;

use super::pool::pooled;
use super::{analyze_game_filtered, AnalysisConfig, OptimalityVerdict, Verdict};
use crate::corpus::CorpusEntry;
use crate::engine::{start_engine, EngineConfig, EngineError, EngineSession, Limits};
use crate::sacrifice::{classify_sacrifice, Bucket};

/// An exact ratio, kept unreduced so reports show what was counted.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fraction {
    pub num: usize,
    pub den: usize,
}

impl Fraction {
    pub fn value(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }

    pub fn percent(self) -> String {
        format!("{:.2}%", 100.0 * self.value())
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RowOutcome {
    /// No engine was used; the row carries the recorded verdict only.
    Recorded,
    /// No game score was ingested for this row.
    Unavailable,
    /// The game was analysed but held no sacrifice of this kind by Karpov.
    NoEvent,
    Failed { reason: String },
    Recomputed { verdict: Box<OptimalityVerdict> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub row: usize,
    pub label: String,
    pub annotation: String,
    pub recorded_verdict: Verdict,
    pub recorded_cp_loss: Option<f64>,
    pub outcome: RowOutcome,
}

impl ReportRow {
    /// The verdict this row contributes to the aggregate.
    pub fn verdict(&self) -> Option<Verdict> {
        match &self.outcome {
            RowOutcome::Recorded => Some(self.recorded_verdict),
            RowOutcome::Recomputed { verdict } => Some(verdict.verdict),
            _ => None,
        }
    }

    pub fn agrees(&self) -> Option<bool> {
        match &self.outcome {
            RowOutcome::Recomputed { verdict } => Some(verdict.verdict == self.recorded_verdict),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableReport {
    pub bucket: Bucket,
    pub rows: Vec<ReportRow>,
}

impl TableReport {
    /// Optimal rows over rows that have a verdict.
    pub fn aggregate(&self) -> Fraction {
        let judged: Vec<Verdict> = self.rows.iter().filter_map(ReportRow::verdict).collect();
        Fraction {
            num: judged.iter().filter(|v| **v == Verdict::Optimal).count(),
            den: judged.len(),
        }
    }

    pub fn recorded_aggregate(&self) -> Fraction {
        Fraction {
            num: self.rows.iter().filter(|r| r.recorded_verdict == Verdict::Optimal).count(),
            den: self.rows.len(),
        }
    }

    /// Matching rows over recomputed rows; `None` without an engine.
    pub fn agreement(&self) -> Option<Fraction> {
        let judged: Vec<bool> = self.rows.iter().filter_map(ReportRow::agrees).collect();
        (!judged.is_empty()).then(|| Fraction {
            num: judged.iter().filter(|a| **a).count(),
            den: judged.len(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reproduction {
    pub queens: TableReport,
    pub rooks_and_knights: TableReport,
    pub engine_id: Option<String>,
    pub limits: Option<Limits>,
    pub epsilon: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ReproduceOptions {
    pub analysis: AnalysisConfig,
    /// Concurrent engine sessions.
    pub jobs: usize,
}

impl Default for ReproduceOptions {
    fn default() -> ReproduceOptions {
        ReproduceOptions {
            analysis: AnalysisConfig::default(),
            jobs: 1,
        }
    }
}

fn row_of(entry: &CorpusEntry, outcome: RowOutcome) -> ReportRow {
    let annotation = match (entry.annotation, entry.pieces) {
        ("", "Q") => String::new(),
        ("", pieces) => pieces.to_string(),
        (a, "Q") => a.to_string(),
        (a, pieces) => format!("{a}; {pieces}"),
    };
    ReportRow {
        row: entry.row,
        label: entry.label.to_string(),
        annotation,
        recorded_verdict: entry.recorded_verdict,
        recorded_cp_loss: entry.recorded_cp_loss(),
        outcome,
    }
}

/// Scores one ingested game: Karpov's sacrifices of the row's kind, the
/// worst of them deciding the row.
fn analyse_entry(session: &mut EngineSession, entry: &CorpusEntry, cfg: &AnalysisConfig) -> Result<RowOutcome, String> {
    let game = entry.game.as_ref().expect("caller checks for a game");
    let karpov = entry.karpov_color();
    let analysis = analyze_game_filtered(session, game, cfg, |e| e.mover == karpov && classify_sacrifice(e) == entry.bucket)
        .map_err(|e| e.to_string())?;
    let worst = analysis.verdicts.into_iter().reduce(|a, b| if b.cp_loss > a.cp_loss { b } else { a });
    Ok(match worst {
        Some(v) => RowOutcome::Recomputed { verdict: Box::new(v) },
        None => RowOutcome::NoEvent,
    })
}

/// Rebuilds both tables. Without an engine every row carries its recorded
/// verdict. With one, each ingested game is analysed on one of `jobs`
/// sessions and the rows are merged back in table order.
///
/// Only a failure to start the first engine session is an error; later
/// failures mark their row and the run continues.
pub fn reproduce_tables(
    entries: &[CorpusEntry],
    engine: Option<&EngineConfig>,
    opts: &ReproduceOptions,
) -> Result<Reproduction, EngineError> {
    let mut outcomes: Vec<RowOutcome> = vec![RowOutcome::Recorded; entries.len()];
    let mut engine_id = None;

    if let Some(cfg) = engine {
        let first = start_engine(cfg)?;
        engine_id = Some(first.engine_id().to_string());
        let work: Vec<usize> = (0..entries.len()).filter(|&i| entries[i].game.is_some()).collect();
        for (i, e) in entries.iter().enumerate() {
            if e.game.is_none() {
                outcomes[i] = RowOutcome::Unavailable;
            }
        }
        let results = pooled(
            cfg,
            first,
            &work,
            opts.jobs,
            |session, &i| analyse_entry(session, &entries[i], &opts.analysis).map_err(|reason| RowOutcome::Failed { reason }),
            |_, e| RowOutcome::Failed { reason: e.to_string() },
        );
        for (&i, outcome) in work.iter().zip(results) {
            outcomes[i] = outcome;
        }
    }

    let table = |bucket: Bucket| TableReport {
        bucket,
        rows: entries
            .iter()
            .zip(&outcomes)
            .filter(|(e, _)| e.bucket == bucket)
            .map(|(e, o)| row_of(e, o.clone()))
            .collect(),
    };
    Ok(Reproduction {
        queens: table(Bucket::Queen),
        rooks_and_knights: table(Bucket::RookOrKnight),
        engine_id,
        limits: engine.map(|_| opts.analysis.limits),
        epsilon: opts.analysis.epsilon,
    })
}

/// Share of optimal play stated in the prose accompanying the tables.
const CLAIMED_OPTIMAL_SHARE: f64 = 0.90;

impl Reproduction {
    pub fn tables(&self) -> [&TableReport; 2] {
        [&self.queens, &self.rooks_and_knights]
    }

    pub fn combined_recorded(&self) -> Fraction {
        let (q, r) = (self.queens.recorded_aggregate(), self.rooks_and_knights.recorded_aggregate());
        Fraction {
            num: q.num + r.num,
            den: q.den + r.den,
        }
    }

    /// True when the recorded marks contradict the claimed share.
    pub fn claim_inconsistent(&self) -> bool {
        self.tables().iter().any(|t| t.recorded_aggregate().value() <= CLAIMED_OPTIMAL_SHARE)
            || self.combined_recorded().value() <= CLAIMED_OPTIMAL_SHARE
    }

    /// One JSON object per line: a `row` record per table row, then a
    /// `summary` per table. Deterministic for a given engine transcript.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let depth = self.limits.and_then(|l| l.depth);
        for t in self.tables() {
            for r in &t.rows {
                let mut rec = json!({
                    "record": "row",
                    "table": t.bucket.as_str(),
                    "row": r.row,
                    "label": r.label,
                    "recorded_verdict": r.recorded_verdict,
                    "recorded_cp_loss": r.recorded_cp_loss,
                    "status": status_name(&r.outcome),
                    "engine_id": self.engine_id,
                    "depth": depth,
                });
                let obj = rec.as_object_mut().expect("object literal");
                match &r.outcome {
                    RowOutcome::Recomputed { verdict: v } => {
                        obj.insert("game_id".into(), json!(v.event.game_id));
                        obj.insert("ply".into(), json!(v.event.ply));
                        obj.insert("piece_class".into(), json!(v.event.piece_class));
                        obj.insert("move".into(), json!(v.event.san));
                        obj.insert("best_move".into(), json!(v.best_move));
                        obj.insert("best_score".into(), json!(v.best_score));
                        obj.insert("played_score".into(), json!(v.played_score));
                        obj.insert("cp_loss".into(), json!(v.cp_loss));
                        obj.insert("win_prob_drop".into(), json!(v.win_prob_drop));
                        obj.insert("verdict".into(), json!(v.verdict));
                        obj.insert("agrees".into(), json!(r.agrees()));
                    }
                    RowOutcome::Failed { reason } => {
                        obj.insert("reason".into(), json!(reason));
                    }
                    _ => {}
                }
                out.push_str(&rec.to_string());
                out.push('\n');
            }
        }
        for t in self.tables() {
            let rec = json!({
                "record": "summary",
                "table": t.bucket.as_str(),
                "optimal": t.aggregate().num,
                "judged": t.aggregate().den,
                "fraction": t.aggregate().to_string(),
                "recorded_fraction": t.recorded_aggregate().to_string(),
                "agreement": t.agreement().map(|a| a.to_string()),
                "engine_id": self.engine_id,
                "depth": depth,
                "epsilon": self.epsilon,
            });
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }

    /// Human-readable tables in the layout of the source: `OK` for optimal,
    /// `X -loss` for sub-optimal.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        match (&self.engine_id, self.limits) {
            (Some(id), Some(l)) => {
                let _ = writeln!(out, "engine: {id}, depth {}, epsilon {} pawns", opt(l.depth), self.epsilon);
            }
            _ => {
                let _ = writeln!(out, "no engine: recorded verdicts only");
            }
        }
        for t in self.tables() {
            let title = match t.bucket {
                Bucket::Queen => "Queen sacrifices",
                _ => "Rook and knight sacrifices",
            };
            let _ = writeln!(out, "\n{title}");
            let engine = self.engine_id.is_some();
            if engine {
                let _ = writeln!(out, "{:>3}  {:<34} {:<8} {:<14} agree", "#", "game", "recorded", "recomputed");
            } else {
                let _ = writeln!(out, "{:>3}  {:<34} {:<8} note", "#", "game", "recorded");
            }
            for r in &t.rows {
                let recorded = mark(r.recorded_verdict, r.recorded_cp_loss, 1);
                if engine {
                    let recomputed = match &r.outcome {
                        RowOutcome::Recomputed { verdict: v } => mark(v.verdict, Some(v.cp_loss), 2),
                        other => status_name(other).to_string(),
                    };
                    let agree = match r.agrees() {
                        Some(true) => "yes",
                        Some(false) => "NO",
                        None => "-",
                    };
                    let _ = writeln!(out, "{:>3}  {:<34} {:<8} {:<14} {}", r.row, r.label, recorded, recomputed, agree);
                } else {
                    let _ = writeln!(out, "{:>3}  {:<34} {:<8} {}", r.row, r.label, recorded, r.annotation);
                }
            }
            let agg = t.aggregate();
            let _ = writeln!(out, "optimal: {agg} ({})", agg.percent());
            if let Some(a) = t.agreement() {
                let _ = writeln!(out, "agreement with recorded marks: {a} ({})", a.percent());
            }
        }
        let all = self.combined_recorded();
        let _ = writeln!(out, "\nrecorded optimal, both tables: {all} ({})", all.percent());
        if self.claim_inconsistent() {
            let _ = writeln!(
                out,
                "note: the accompanying text claims over {:.0}% optimal play; the recorded marks give {} and {} ({} combined), so that claim is not reproduced",
                CLAIMED_OPTIMAL_SHARE * 100.0,
                self.queens.recorded_aggregate(),
                self.rooks_and_knights.recorded_aggregate(),
                all
            );
        }
        out
    }
}

fn opt(v: Option<u32>) -> String {
    v.map_or_else(|| "-".into(), |d| d.to_string())
}

fn status_name(o: &RowOutcome) -> &'static str {
    match o {
        RowOutcome::Recorded => "recorded",
        RowOutcome::Unavailable => "unavailable",
        RowOutcome::NoEvent => "no-event",
        RowOutcome::Failed { .. } => "failed",
        RowOutcome::Recomputed { .. } => "recomputed",
    }
}

fn mark(v: Verdict, loss: Option<f64>, decimals: usize) -> String {
    match (v, loss) {
        (Verdict::Optimal, _) => "OK".into(),
        (Verdict::Suboptimal, Some(l)) => format!("X -{l:.decimals$}"),
        (Verdict::Suboptimal, None) => "X".into(),
    }
}
