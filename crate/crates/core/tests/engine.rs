use std::io::Write;
use std::time::Duration;

use sacscore::chess::*;
use sacscore::engine::*;

const FAKE: &str = env!("CARGO_BIN_EXE_fake-uci");

fn script(json: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn config(script: Option<&tempfile::NamedTempFile>) -> EngineConfig {
    let mut cfg = EngineConfig::new(FAKE);
    cfg.depth_limit = Some(12);
    cfg.multipv = 3;
    cfg.handshake_timeout = Duration::from_secs(5);
    cfg.search_timeout = Some(Duration::from_secs(5));
    if let Some(s) = script {
        cfg.args = vec!["--script".into(), s.path().display().to_string()];
    }
    cfg
}

fn mv(pos: &Position, uci: &str) -> Move {
    parse_uci_move(pos, uci).unwrap()
}

#[test]
fn handshake_reports_engine_name() {
    let session = start_engine(&config(None)).unwrap();
    assert_eq!(session.engine_id(), "FakeFish 1.0");
    let sent: Vec<&str> = session
        .transcript()
        .iter()
        .filter(|l| l.direction == Direction::Sent)
        .map(|l| l.text.as_str())
        .collect();
    assert_eq!(
        sent,
        [
            "uci",
            "setoption name Threads value 1",
            "setoption name Hash value 256",
            "setoption name MultiPV value 3",
            "isready"
        ]
    );
}

#[test]
fn missing_executable_is_a_spawn_error() {
    let cfg = EngineConfig::new("/nonexistent/engine-binary");
    assert!(matches!(start_engine(&cfg), Err(EngineError::Spawn { .. })));
}

#[test]
fn engine_that_exits_after_handshake_breaks_the_pipe() {
    let s = script(r#"{"mode": "exit_after_handshake"}"#);
    let mut session = start_engine(&config(Some(&s))).unwrap();
    let err = session.evaluate_position(&Position::startpos(), &Limits::depth(5)).unwrap_err();
    assert!(matches!(err, EngineError::BrokenPipe { .. }), "{err}");
}

#[test]
fn non_uci_chatter_is_a_protocol_error_with_excerpt() {
    let s = script(r#"{"mode": "chatter"}"#);
    match start_engine(&config(Some(&s))) {
        Err(EngineError::Protocol { excerpt, .. }) => assert!(excerpt.contains("hello there"), "{excerpt}"),
        Err(other) => panic!("unexpected error {other}"),
        Ok(_) => panic!("chatter accepted as UCI"),
    }
}

#[test]
fn silent_search_times_out() {
    let s = script(r#"{"mode": "hang_on_go"}"#);
    let mut cfg = config(Some(&s));
    cfg.search_timeout = Some(Duration::from_millis(300));
    let mut session = start_engine(&cfg).unwrap();
    let err = session.evaluate_position(&Position::startpos(), &Limits::depth(5)).unwrap_err();
    assert!(matches!(err, EngineError::Timeout { .. }), "{err}");
}

#[test]
fn malformed_info_is_a_protocol_error() {
    let s = script(r#"{"mode": "garbage_info"}"#);
    let mut session = start_engine(&config(Some(&s))).unwrap();
    let err = session.evaluate_position(&Position::startpos(), &Limits::depth(5)).unwrap_err();
    assert!(err.to_string().contains("unparseable info line"), "{err}");
    // the session drained to bestmove and is still in step
    assert!(transcript_is_serialized(session.transcript()));
}

#[test]
fn bestmove_outside_reported_lines_is_rejected() {
    let s = script(r#"{"bestmove_override": "h2h4", "default_cp": 5}"#);
    let mut session = start_engine(&config(Some(&s))).unwrap();
    let err = session.evaluate_position(&Position::startpos(), &Limits::depth(5)).unwrap_err();
    assert!(err.to_string().contains("bestmove h2h4"), "{err}");
}

const BLACK_TO_MOVE: &str = "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1";

fn scripted() -> tempfile::NamedTempFile {
    script(&format!(
        r#"{{
  "id_name": "Scripted 2",
  "positions": [
    {{"fen": "{BLACK_TO_MOVE}",
      "lines": [
        {{"cp": 25, "pv": ["c7c5", "g1f3", "d7d6"]}},
        {{"cp": -10, "pv": ["e7e5"]}},
        {{"mate": -4, "pv": ["f7f6", "d1h5"]}}
      ],
      "searchmoves": {{"g7g5": {{"cp": -180}}}}
    }},
    {{"fen": "6k1/5ppp/8/8/8/8/8/R5K1 w - - 0 1",
      "lines": [{{"mate": 1, "pv": ["a1a8"]}}, {{"cp": 300, "pv": ["a1a7"]}}]
    }}
  ]
}}"#
    ))
}

#[test]
fn scripted_lines_parse_exactly() {
    let s = scripted();
    let mut session = start_engine(&config(Some(&s))).unwrap();
    let pos = parse_fen(BLACK_TO_MOVE).unwrap();
    let eval = session.evaluate_position(&pos, &Limits::depth(12)).unwrap();
    let after_c5 = pos.play_unchecked(&mv(&pos, "c7c5"));
    let after_nf3 = after_c5.play_unchecked(&mv(&after_c5, "g1f3"));
    let expected = EngineEvaluation {
        position: pos,
        lines: vec![
            EngineLine {
                rank: 1,
                mv: mv(&pos, "c7c5"),
                // black's +25 is white's -25
                score: NormalizedScore::cp(-25),
                pv: vec![mv(&pos, "c7c5"), mv(&after_c5, "g1f3"), mv(&after_nf3, "d7d6")],
            },
            EngineLine {
                rank: 2,
                mv: mv(&pos, "e7e5"),
                score: NormalizedScore::cp(10),
                pv: vec![mv(&pos, "e7e5")],
            },
            EngineLine {
                rank: 3,
                mv: mv(&pos, "f7f6"),
                score: NormalizedScore::mate(4),
                pv: vec![mv(&pos, "f7f6"), mv(&pos.play_unchecked(&mv(&pos, "f7f6")), "d1h5")],
            },
        ],
        depth_reached: 12,
        engine_id: "Scripted 2".into(),
    };
    assert_eq!(eval, expected);
}

#[test]
fn searchmoves_returns_the_scripted_score() {
    let s = scripted();
    let mut session = start_engine(&config(Some(&s))).unwrap();
    let pos = parse_fen(BLACK_TO_MOVE).unwrap();
    let limits = Limits::depth(12);
    assert_eq!(session.evaluate_move(&pos, &mv(&pos, "g7g5"), &limits).unwrap(), NormalizedScore::cp(180));
    // the best move searched alone scores like the rank-1 line
    let best = session.evaluate_position(&pos, &limits).unwrap();
    let alone = session.evaluate_move(&pos, &best.best().mv, &limits).unwrap();
    assert_eq!(alone, best.best().score);
    assert!(transcript_is_serialized(session.transcript()));
}

#[test]
fn mate_in_one_is_reported_as_mate() {
    let s = scripted();
    let mut session = start_engine(&config(Some(&s))).unwrap();
    let pos = parse_fen("6k1/5ppp/8/8/8/8/8/R5K1 w - - 0 1").unwrap();
    let eval = session.evaluate_position(&pos, &Limits::depth(12)).unwrap();
    assert_eq!(eval.best().score, NormalizedScore::mate(1));
    assert_eq!(eval.best().mv.to_uci(), "a1a8");
}

#[test]
fn repeated_searches_agree_and_stay_serialized() {
    let mut session = start_engine(&config(None)).unwrap();
    let pos = Position::startpos();
    let first = session.evaluate_position(&pos, &Limits::depth(4)).unwrap();
    for _ in 0..5 {
        session.new_game().unwrap();
        assert_eq!(session.evaluate_position(&pos, &Limits::depth(4)).unwrap(), first);
    }
    assert_eq!(first.lines.len(), 3);
    assert!(transcript_is_serialized(session.transcript()));
}

#[test]
fn checkmated_position_is_refused() {
    let mut session = start_engine(&config(None)).unwrap();
    let pos = parse_fen("R5k1/5ppp/8/8/8/8/8/6K1 b - - 0 1").unwrap();
    assert!(matches!(
        session.evaluate_position(&pos, &Limits::depth(3)),
        Err(EngineError::NoLegalMoves)
    ));
}

// Checks against a real engine run only when one is configured.
fn real_engine() -> Option<EngineSession> {
    let path = std::env::var("SACSCORE_ENGINE").ok()?;
    let mut cfg = EngineConfig::new(path);
    cfg.depth_limit = Some(16);
    cfg.multipv = 1;
    Some(start_engine(&cfg).expect("configured engine starts"))
}

#[test]
fn real_engine_sanity() {
    let Some(mut session) = real_engine() else {
        eprintln!("SACSCORE_ENGINE not set; skipping real-engine checks");
        return;
    };
    let limits = Limits::depth(16);
    let start = session.evaluate_position(&Position::startpos(), &limits).unwrap();
    assert_eq!(start.best().score.kind, ScoreKind::Centipawns);
    assert!((start.best().score.value - 20).abs() <= 100, "{}", start.best().score);

    let mate = parse_fen("6k1/5ppp/8/8/8/8/8/R5K1 w - - 0 1").unwrap();
    assert_eq!(session.evaluate_position(&mate, &limits).unwrap().best().score, NormalizedScore::mate(1));

    // Qd5 walks into the c6 pawn
    let quiet = parse_fen("r1b1kb1r/pp3ppp/2p2n2/4p3/4P3/2N5/PPP2PPP/R1BQKB1R w KQkq - 0 7").unwrap();
    let best = session.evaluate_position(&quiet, &limits).unwrap();
    let hang = session.evaluate_move(&quiet, &mv(&quiet, "d1d5"), &limits).unwrap();
    assert!(best.best().score.as_cp() - hang.as_cp() >= 700, "{} vs {}", best.best().score, hang);
}
