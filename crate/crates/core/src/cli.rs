//! The `sacscore` command line.
//!
//! Exit codes are part of the interface: 0 success, 1 usage, 2 unparsable
//! input, 3 engine or protocol failure, 4 internal error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bellman::{value_iteration, write_table, EndgameSpec, OpponentModel, SolveError, SolveOptions};
use crate::chess::{divide, emit_fen, parse_fen, parse_pgn, perft_with, Color, Position, STARTING_FEN};
use crate::corpus::{ingest_games, load_corpus, verify_anchors};
use crate::engine::{EngineConfig, EngineError};
use crate::evaluation::{
    analyze_games, centipawn_advantage, reproduce_tables, win_probability, AnalysisConfig, GameAnalysis,
    ReproduceOptions, DEFAULT_EPSILON,
};
use crate::par::Parallelism;
use crate::sacrifice::DetectorConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ENGINE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sacscore", version, about = "Score chess sacrifices against an engine and solve small endgames exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect sacrifices in a PGN file and score each against the engine.
    Analyze(AnalyzeArgs),
    /// Rebuild the two Karpov sacrifice tables, optionally recomputing them.
    Reproduce(ReproduceArgs),
    /// Convert between pawn advantage and win probability.
    Convert(ConvertArgs),
    /// Solve a pawnless endgame by value iteration and write the table.
    Solve(SolveArgs),
    /// Count leaf nodes of the legal move tree.
    Perft(PerftArgs),
    /// Replay the annotated corpus positions and report illegal moves.
    Anchors,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    #[value(alias = "structured")]
    Json,
}

#[derive(Debug, Args)]
struct EngineArgs {
    /// UCI engine executable.
    #[arg(long, env = "SACSCORE_ENGINE")]
    engine: Option<PathBuf>,
    /// Extra argument passed to the engine; repeatable.
    #[arg(long = "engine-arg", allow_hyphen_values = true)]
    engine_args: Vec<String>,
    #[arg(long, default_value_t = 20)]
    depth: u32,
    /// Fixed time per search in milliseconds; with --depth both apply.
    #[arg(long)]
    movetime: Option<u64>,
    #[arg(long, default_value_t = 4)]
    multipv: u32,
    #[arg(long, default_value_t = 1)]
    threads: u32,
    /// Engine hash size in MB.
    #[arg(long, default_value_t = 256)]
    hash: u32,
    /// Concurrent engine sessions.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl EngineArgs {
    fn config(&self) -> Option<EngineConfig> {
        let path = self.engine.as_ref()?;
        let mut cfg = EngineConfig::new(path);
        cfg.args = self.engine_args.clone();
        cfg.depth_limit = Some(self.depth);
        cfg.time_limit_ms = self.movetime;
        cfg.multipv = self.multipv;
        cfg.threads = self.threads;
        cfg.hash_mb = self.hash;
        Some(cfg)
    }
}

#[derive(Debug, Args)]
struct ScoringArgs {
    /// Loss in pawns still counted as optimal.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Plies of capture search behind a candidate sacrifice.
    #[arg(long, default_value_t = DetectorConfig::default().horizon_plies)]
    horizon: u32,
    /// Material given up, in pawns, before a move counts as a sacrifice.
    #[arg(long, default_value_t = DetectorConfig::default().swing_threshold)]
    swing_threshold: i32,
    /// Net material a queen sacrifice must give up, in pawns.
    #[arg(long, default_value_t = DetectorConfig::default().queen_net_threshold)]
    queen_net_threshold: i32,
    /// Count even trades such as queen for queen.
    #[arg(long)]
    keep_trades: bool,
    /// Ignore sacrifices where every alternative loses as much.
    #[arg(long)]
    skip_forced: bool,
}

impl ScoringArgs {
    fn config(&self, engine: &EngineArgs) -> Result<AnalysisConfig, String> {
        let detector = DetectorConfig {
            horizon_plies: self.horizon,
            swing_threshold: self.swing_threshold,
            queen_net_threshold: self.queen_net_threshold,
            exclude_even_trades: !self.keep_trades,
            skip_forced: self.skip_forced,
        };
        detector.validate().map_err(|e| e.to_string())?;
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(format!("epsilon must be a non-negative number, got {}", self.epsilon));
        }
        let limits = crate::engine::Limits {
            depth: Some(engine.depth),
            movetime_ms: engine.movetime,
        };
        Ok(AnalysisConfig {
            detector,
            limits,
            epsilon: self.epsilon,
        })
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    pgn: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Directory of PGN files holding the corpus games.
    #[arg(long, env = "SACSCORE_PGN_DIR")]
    pgn_dir: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ConvertArgs {
    /// Advantage in pawns, printed as a win probability.
    #[arg(long, allow_hyphen_values = true)]
    cp: Option<String>,
    /// Win probability, printed as an advantage in pawns.
    #[arg(long, allow_hyphen_values = true)]
    winprob: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Adversarial,
    Stochastic,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ColorArg {
    White,
    Black,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Material such as KQvK.
    spec: String,
    #[arg(long, value_enum, default_value_t = ModelArg::Adversarial)]
    model: ModelArg,
    /// Side playing uniformly at random under the stochastic model;
    /// defaults to the side with less material.
    #[arg(long, value_enum)]
    defender: Option<ColorArg>,
    /// Table file; defaults to <SPEC>.sctb in the current directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Solve without writing a table file.
    #[arg(long, conflicts_with = "output")]
    no_write: bool,
    #[arg(long, default_value_t = SolveOptions::default().max_pieces)]
    max_pieces: usize,
    /// Keep all eight images of each state.
    #[arg(long)]
    no_symmetry: bool,
    #[arg(long)]
    sequential: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct PerftArgs {
    /// A FEN string, or `startpos`.
    position: String,
    depth: u32,
    /// Break the count down by first move.
    #[arg(long)]
    divide: bool,
    #[arg(long)]
    sequential: bool,
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code. Reports go to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Reproduce(a) => cmd_reproduce(&a),
        Command::Convert(a) => cmd_convert(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Perft(a) => cmd_perft(&a),
        Command::Anchors => cmd_anchors(),
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("sacscore: {msg}");
    code
}

fn engine_exit(e: &EngineError) -> i32 {
    match e {
        EngineError::Config(_) => EXIT_USAGE,
        _ => EXIT_ENGINE,
    }
}

fn emit(output: Option<&Path>, text: &str) -> i32 {
    match output {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => EXIT_OK,
            Err(e) => fail(EXIT_INTERNAL, format!("cannot write {}: {e}", path.display())),
        },
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Ok(()) => EXIT_OK,
                Err(e) => fail(EXIT_INTERNAL, format!("cannot write report: {e}")),
            }
        }
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> i32 {
    let cfg = match a.scoring.config(&a.engine) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let text = match std::fs::read_to_string(&a.pgn) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_PARSE, format!("cannot read {}: {e}", a.pgn.display())),
    };
    let games = match parse_pgn(&text) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_PARSE, format!("{}: {e}", a.pgn.display())),
    };
    // Nothing to score means nothing to ask an engine.
    if games.is_empty() {
        return emit(a.output.as_deref(), &analysis_report(a.format, &[], &[], None, &cfg));
    }
    let Some(engine) = a.engine.config() else {
        return fail(EXIT_USAGE, "analyze needs an engine: pass --engine or set SACSCORE_ENGINE");
    };
    if let Err(e) = engine.validate() {
        return fail(EXIT_USAGE, e);
    }
    log::info!("analysing {} games with {} session(s)", games.len(), a.engine.jobs.max(1));
    let results = match analyze_games(&games, &engine, &cfg, a.engine.jobs) {
        Ok(r) => r,
        Err(e) => return fail(engine_exit(&e), e),
    };
    let mut done = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(g) => done.push(g),
            Err(e) => {
                eprintln!("sacscore: {e}");
                errors.push(e.to_string());
            }
        }
    }
    let engine_id = done.first().map(|g| g.engine_id.clone());
    let code = emit(a.output.as_deref(), &analysis_report(a.format, &done, &errors, engine_id, &cfg));
    if code == EXIT_OK && !errors.is_empty() {
        EXIT_ENGINE
    } else {
        code
    }
}

fn analysis_report(
    format: Format,
    games: &[GameAnalysis],
    errors: &[String],
    engine_id: Option<String>,
    cfg: &AnalysisConfig,
) -> String {
    match format {
        Format::Json => {
            let doc = json!({
                "engine_id": engine_id,
                "limits": cfg.limits,
                "epsilon": cfg.epsilon,
                "detector": cfg.detector,
                "games": games,
                "errors": errors,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            if let Some(id) = &engine_id {
                let _ = writeln!(
                    out,
                    "engine: {id}, depth {}, epsilon {} pawns",
                    cfg.limits.depth.map_or("-".into(), |d| d.to_string()),
                    cfg.epsilon
                );
            }
            let rows: usize = games.iter().map(|g| g.verdicts.len()).sum();
            let _ = writeln!(out, "{:<28} {:>4} {:<5} {:<7} {:<7} {:<7} {:>8} {:>8} {:>6}  verdict", "game", "ply", "side", "piece", "move", "best", "eval", "played", "loss");
            for g in games {
                for v in &g.verdicts {
                    let e = &v.event;
                    let _ = writeln!(
                        out,
                        "{:<28} {:>4} {:<5} {:<7} {:<7} {:<7} {:>8} {:>8} {:>6.2}  {}{}",
                        truncate(&g.game_id, 28),
                        e.ply,
                        e.mover,
                        e.piece_class.as_str(),
                        e.san,
                        v.best_move.to_uci(),
                        v.best_score.to_string(),
                        v.played_score.to_string(),
                        v.cp_loss,
                        v.verdict,
                        if e.declined { " (declined)" } else { "" }
                    );
                }
            }
            let optimal = games
                .iter()
                .flat_map(|g| &g.verdicts)
                .filter(|v| v.verdict == crate::evaluation::Verdict::Optimal)
                .count();
            let _ = writeln!(out, "{} games, {rows} sacrifices, {optimal} optimal", games.len());
            for e in errors {
                let _ = writeln!(out, "error: {e}");
            }
            out
        }
    }
}

fn truncate(s: &str, n: usize) -> String {
    if s.chars().count() <= n {
        s.to_string()
    } else {
        s.chars().take(n - 1).chain(std::iter::once('~')).collect()
    }
}

fn cmd_reproduce(a: &ReproduceArgs) -> i32 {
    let analysis = match a.scoring.config(&a.engine) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let mut entries = load_corpus();
    if let Some(dir) = &a.pgn_dir {
        let report = ingest_games(&mut entries, dir);
        for w in &report.warnings {
            eprintln!("sacscore: warning: {w}");
        }
        log::info!("attached {} games, {} rows without a game", report.matched.len(), report.unmatched.len());
    }
    let engine = a.engine.config();
    if let Some(cfg) = &engine {
        if let Err(e) = cfg.validate() {
            return fail(EXIT_USAGE, e);
        }
    }
    let opts = ReproduceOptions {
        analysis,
        jobs: a.engine.jobs,
    };
    let rep = match reproduce_tables(&entries, engine.as_ref(), &opts) {
        Ok(r) => r,
        Err(e) => return fail(engine_exit(&e), e),
    };
    let text = match a.format {
        Format::Json => rep.to_jsonl(),
        Format::Text => rep.render_text(),
    };
    emit(a.output.as_deref(), &text)
}

fn cmd_convert(a: &ConvertArgs) -> i32 {
    let number = |s: &str| -> Result<f64, String> {
        match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(format!("'{s}' is not a finite number")),
        }
    };
    let result = match (&a.cp, &a.winprob) {
        (Some(cp), _) => number(cp).map(win_probability),
        (_, Some(w)) => number(w).and_then(|w| centipawn_advantage(w).map_err(|e| e.to_string())),
        _ => unreachable!("clap requires one of the two"),
    };
    match result {
        Ok(x) => {
            println!("{x:.6}");
            EXIT_OK
        }
        Err(e) => fail(EXIT_PARSE, e),
    }
}

fn cmd_solve(a: &SolveArgs) -> i32 {
    let spec: EndgameSpec = match a.spec.parse() {
        Ok(s) => s,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if let Err(e) = spec.check_size(a.max_pieces) {
        return fail(EXIT_USAGE, e);
    }
    let model = match (a.model, a.defender) {
        (ModelArg::Adversarial, None) => OpponentModel::Adversarial,
        (ModelArg::Adversarial, Some(_)) => return fail(EXIT_USAGE, "--defender only applies to --model stochastic"),
        (ModelArg::Stochastic, None) => OpponentModel::uniform_defender(&spec),
        (ModelArg::Stochastic, Some(c)) => OpponentModel::Stochastic {
            defender: match c {
                ColorArg::White => Color::White,
                ColorArg::Black => Color::Black,
            },
        },
    };
    let opts = SolveOptions {
        max_pieces: a.max_pieces,
        symmetry: !a.no_symmetry,
        parallelism: if a.sequential { Parallelism::Sequential } else { Parallelism::Parallel },
        ..SolveOptions::default()
    };
    let started = std::time::Instant::now();
    let table = match value_iteration(&spec, model, &opts) {
        Ok(t) => t,
        Err(SolveError::Spec(e)) => return fail(EXIT_USAGE, e),
        Err(e) => return fail(EXIT_INTERNAL, e),
    };
    let elapsed = started.elapsed();
    let residual = table.bellman_residual();
    let path = (!a.no_write).then(|| a.output.clone().unwrap_or_else(|| PathBuf::from(format!("{spec}.sctb"))));
    if let Some(path) = &path {
        let written = std::fs::File::create(path).and_then(|f| {
            let mut w = std::io::BufWriter::new(f);
            write_table(&table, &mut w)?;
            w.flush()
        });
        if let Err(e) = written {
            return fail(EXIT_INTERNAL, format!("cannot write {}: {e}", path.display()));
        }
    }
    let s = table.summary();
    let text = match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&s).expect("summary serializes");
            let obj = v.as_object_mut().expect("summary is an object");
            obj.insert("symmetry".into(), json!(opts.symmetry));
            obj.insert("bellman_residual".into(), json!(residual));
            obj.insert("file".into(), json!(path.as_ref().map(|p| p.display().to_string())));
            format!("{v}\n")
        }
        Format::Text => {
            let mut out = String::new();
            let model = match s.model {
                OpponentModel::Adversarial => "adversarial".to_string(),
                OpponentModel::Stochastic { defender } => format!("stochastic, {defender} moves at random"),
            };
            let _ = writeln!(out, "endgame: {} ({model})", s.spec);
            let _ = writeln!(
                out,
                "states: {} ({} white to move, {} black to move){}",
                s.states,
                s.white_to_move,
                s.black_to_move,
                if opts.symmetry { ", one per symmetry class" } else { "" }
            );
            let _ = writeln!(out, "white wins: {}  draws: {}  black wins: {}", s.white_wins, s.draws, s.black_wins);
            if table.is_exact() {
                let _ = writeln!(out, "max distance to mate: {} plies", s.max_dtm);
            } else {
                let _ = writeln!(out, "mean value for white: {:.6}", s.mean_white_value);
            }
            let _ = writeln!(out, "bellman residual: {residual}");
            let _ = writeln!(out, "sweeps: {}  time: {:.2}s", s.iterations, elapsed.as_secs_f64());
            if let Some(p) = &path {
                let _ = writeln!(out, "table written to {}", p.display());
            }
            out
        }
    };
    emit(None, &text)
}

fn cmd_perft(a: &PerftArgs) -> i32 {
    let fen = if a.position.trim() == "startpos" { STARTING_FEN } else { a.position.as_str() };
    let pos: Position = match parse_fen(fen) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_PARSE, e),
    };
    let mode = if a.sequential { Parallelism::Sequential } else { Parallelism::Parallel };
    let mut out = String::new();
    if a.divide && a.depth > 0 {
        let mut parts = divide(&pos, a.depth, mode);
        parts.sort_by_key(|(m, _)| m.to_uci());
        let mut total = 0;
        for (m, n) in parts {
            let _ = writeln!(out, "{}: {n}", m.to_uci());
            total += n;
        }
        let _ = writeln!(out, "\n{total}");
    } else {
        log::debug!("perft {} at depth {}", emit_fen(&pos), a.depth);
        let _ = writeln!(out, "{}", perft_with(&pos, a.depth, mode));
    }
    emit(None, &out)
}

fn cmd_anchors() -> i32 {
    let mut out = String::new();
    for check in verify_anchors(&load_corpus()) {
        let _ = writeln!(out, "{check}");
    }
    emit(None, &out)
}
