//! UCI line parsing and score normalization.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::chess::Color;

/// Centipawn magnitude that stands in for a mate when a scalar is needed.
pub const MATE_CP: i32 = 10000;
pub const CP_LIMIT: i32 = 30000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    Centipawns,
    MateIn,
}

/// Engine score from white's point of view. A positive mate value means
/// white mates in that many moves.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalizedScore {
    pub kind: ScoreKind,
    pub value: i32,
}

impl NormalizedScore {
    pub fn cp(value: i32) -> NormalizedScore {
        NormalizedScore {
            kind: ScoreKind::Centipawns,
            value,
        }
    }

    pub fn mate(moves: i32) -> NormalizedScore {
        NormalizedScore {
            kind: ScoreKind::MateIn,
            value: moves,
        }
    }

    pub fn is_mate(&self) -> bool {
        self.kind == ScoreKind::MateIn
    }

    /// The same score seen from the other side.
    pub fn flipped(self) -> NormalizedScore {
        NormalizedScore {
            kind: self.kind,
            value: -self.value,
        }
    }

    /// Score from `color`'s side.
    pub fn for_color(self, color: Color) -> NormalizedScore {
        match color {
            Color::White => self,
            Color::Black => self.flipped(),
        }
    }

    /// Centipawn scalar. Mate in n maps to ±(10000 − 2|n|), so a faster
    /// mate is always worth more and the scale stays finite.
    pub fn as_cp(&self) -> i32 {
        match self.kind {
            ScoreKind::Centipawns => self.value,
            ScoreKind::MateIn => self.value.signum() * (MATE_CP - 2 * self.value.abs()),
        }
    }

    /// Centipawn scalar in pawns.
    pub fn as_pawns(&self) -> f64 {
        self.as_cp() as f64 / 100.0
    }
}

impl fmt::Display for NormalizedScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ScoreKind::Centipawns => write!(f, "cp {}", self.value),
            ScoreKind::MateIn => write!(f, "mate {}", self.value),
        }
    }
}

impl Serialize for NormalizedScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("NormalizedScore", 2)?;
        s.serialize_field("kind", &self.kind)?;
        s.serialize_field("value", &self.value)?;
        s.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreError(pub String);

impl fmt::Display for ScoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad score token '{}'", self.0)
    }
}

/// Converts a side-to-move score token (`cp 35`, `mate -3`) to white's view.
pub fn normalize_score(raw: &str, side_to_move: Color) -> Result<NormalizedScore, ScoreError> {
    let mut parts = raw.split_whitespace();
    let (kind, value) = (parts.next(), parts.next().and_then(|v| v.parse::<i32>().ok()));
    if parts.next().is_some() {
        return Err(ScoreError(raw.to_string()));
    }
    let score = match (kind, value) {
        (Some("cp"), Some(v)) if v.abs() <= CP_LIMIT => NormalizedScore::cp(v),
        (Some("mate"), Some(v)) if v != 0 => NormalizedScore::mate(v),
        _ => return Err(ScoreError(raw.to_string())),
    };
    Ok(score.for_color(side_to_move))
}

/// The fields of an `info` line that analysis cares about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoLine {
    pub depth: Option<u32>,
    pub multipv: u32,
    /// Raw side-to-move score token, e.g. `cp 35`.
    pub score: Option<String>,
    /// Set for `lowerbound` / `upperbound` scores, which are not final.
    pub bound: bool,
    pub pv: Vec<String>,
}

const INFO_KEYS_WITH_ONE_VALUE: &[&str] = &[
    "depth", "seldepth", "time", "nodes", "multipv", "currmove", "currmovenumber", "hashfull", "nps", "tbhits",
    "sbhits", "cpuload",
];

/// Parses an `info` line. `Ok(None)` means the line is not an info line;
/// an error means the line is an info line with a malformed field.
pub fn parse_info(line: &str) -> Result<Option<InfoLine>, String> {
    let mut tokens = line.split_whitespace().peekable();
    if tokens.next() != Some("info") {
        return Ok(None);
    }
    let mut info = InfoLine {
        depth: None,
        multipv: 1,
        score: None,
        bound: false,
        pv: Vec::new(),
    };
    while let Some(tok) = tokens.next() {
        match tok {
            "string" => break,
            "score" => {
                let kind = tokens.next().ok_or("score without kind")?;
                let value = tokens.next().ok_or("score without value")?;
                if !matches!(kind, "cp" | "mate") || value.parse::<i32>().is_err() {
                    return Err(format!("bad score '{kind} {value}'"));
                }
                info.score = Some(format!("{kind} {value}"));
                while let Some(&next) = tokens.peek() {
                    if next == "lowerbound" || next == "upperbound" {
                        info.bound = true;
                        tokens.next();
                    } else {
                        break;
                    }
                }
            }
            "pv" => {
                info.pv = tokens.by_ref().map(str::to_string).collect();
            }
            "wdl" => {
                for _ in 0..3 {
                    tokens.next();
                }
            }
            "refutation" | "currline" => break,
            key if INFO_KEYS_WITH_ONE_VALUE.contains(&key) => {
                let value = tokens.next().ok_or_else(|| format!("'{key}' without value"))?;
                match key {
                    "depth" => info.depth = Some(value.parse().map_err(|_| format!("bad depth '{value}'"))?),
                    "multipv" => {
                        info.multipv = value
                            .parse()
                            .ok()
                            .filter(|&k: &u32| k >= 1)
                            .ok_or_else(|| format!("bad multipv '{value}'"))?
                    }
                    _ => {}
                }
            }
            other => return Err(format!("unknown info field '{other}'")),
        }
    }
    Ok(Some(info))
}

/// Extracts the move from a `bestmove` line.
pub fn parse_bestmove(line: &str) -> Option<&str> {
    let mut tokens = line.split_whitespace();
    (tokens.next() == Some("bestmove")).then(|| tokens.next()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_score("cp 35", Color::White), Ok(NormalizedScore::cp(35)));
        assert_eq!(normalize_score("cp 35", Color::Black), Ok(NormalizedScore::cp(-35)));
        assert_eq!(normalize_score("mate -3", Color::Black), Ok(NormalizedScore::mate(3)));
        assert!(normalize_score("mate 0", Color::White).is_err());
        assert!(normalize_score("wdl 1", Color::White).is_err());
        assert!(normalize_score("cp 40000", Color::White).is_err());
    }

    #[test]
    fn flipping_twice_is_identity() {
        for raw in ["cp 0", "cp -250", "mate 4", "mate -1"] {
            let s = normalize_score(raw, Color::White).unwrap();
            assert_eq!(s.flipped().flipped(), s);
            assert_eq!(normalize_score(raw, Color::Black).unwrap(), s.flipped());
        }
    }

    #[test]
    fn mate_scalar_is_monotone_in_distance() {
        assert_eq!(NormalizedScore::mate(2).as_cp(), 9996);
        assert_eq!(NormalizedScore::mate(-1).as_cp(), -9998);
        assert!(NormalizedScore::mate(1).as_cp() > NormalizedScore::mate(5).as_cp());
        assert!(NormalizedScore::mate(5).as_cp() > NormalizedScore::cp(3000).as_cp());
    }

    #[test]
    fn info_lines() {
        let line = "info depth 20 seldepth 28 multipv 2 score cp -15 upperbound nodes 123 nps 1 hashfull 3 tbhits 0 time 9 pv e7e5 g1f3";
        let info = parse_info(line).unwrap().unwrap();
        assert_eq!(info.depth, Some(20));
        assert_eq!(info.multipv, 2);
        assert_eq!(info.score.as_deref(), Some("cp -15"));
        assert!(info.bound);
        assert_eq!(info.pv, vec!["e7e5", "g1f3"]);

        let wdl = parse_info("info depth 3 multipv 1 score mate 2 wdl 1000 0 0 pv h5f7").unwrap().unwrap();
        assert_eq!(wdl.score.as_deref(), Some("mate 2"));
        assert_eq!(parse_info("info string NNUE enabled").unwrap().unwrap().score, None);
        assert_eq!(parse_info("bestmove e2e4").unwrap(), None);
        assert!(parse_info("info depth x").is_err());
        assert!(parse_info("info depth 5 score banana 3").is_err());
    }

    #[test]
    fn bestmove_token() {
        assert_eq!(parse_bestmove("bestmove e2e4 ponder e7e5"), Some("e2e4"));
        assert_eq!(parse_bestmove("bestmove"), None);
        assert_eq!(parse_bestmove("info"), None);
    }
}
