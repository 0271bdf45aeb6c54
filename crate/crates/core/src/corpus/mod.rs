//! The embedded sacrifice datasets: sixteen queen sacrifices and sixteen
//! rook or knight sacrifices by Karpov, each with its recorded verdict, plus
//! five annotated anchor positions.
//!
//! Game scores are not shipped. [`ingest_games`] attaches user-supplied PGN
//! files to the entries they belong to.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::chess::{parse_fen_with, parse_pgn, parse_san, Color, FenNote, FenOptions, GameRecord, Position};
use crate::evaluation::Verdict;
use crate::sacrifice::Bucket;

/// Annotated position with the move sequence printed beside it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Anchor {
    pub fen: &'static str,
    pub sequence: &'static [&'static str],
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusEntry {
    /// One-based row within its table.
    pub row: usize,
    pub label: &'static str,
    pub bucket: Bucket,
    pub source_url: &'static str,
    pub recorded_verdict: Verdict,
    /// Recorded loss in centipawns, present exactly for sub-optimal rows.
    pub recorded_loss_cp: Option<i32>,
    pub annotation: &'static str,
    /// Pieces given up, as annotated in the table.
    pub pieces: &'static str,
    pub event: Option<&'static str>,
    pub year: Option<u16>,
    pub site: Option<&'static str>,
    pub anchor: Option<Anchor>,
    /// False where both sides gave up a queen and the table does not say
    /// whose sacrifice the mark refers to. Reproduction scores Karpov's.
    pub scored_side_known: bool,
    #[serde(skip)]
    pub game: Option<GameRecord>,
}

impl CorpusEntry {
    fn players(&self) -> (&'static str, &'static str) {
        let (w, b) = self.label.split_once(" vs ").expect("label has two players");
        (w.trim(), b.trim())
    }

    pub fn white_surname(&self) -> &'static str {
        surname(self.players().0)
    }

    pub fn black_surname(&self) -> &'static str {
        surname(self.players().1)
    }

    pub fn karpov_color(&self) -> Color {
        if self.white_surname() == "Karpov" {
            Color::White
        } else {
            Color::Black
        }
    }

    /// Karpov's opponent, by surname.
    pub fn opponent(&self) -> &'static str {
        match self.karpov_color() {
            Color::White => self.black_surname(),
            Color::Black => self.white_surname(),
        }
    }

    pub fn recorded_cp_loss(&self) -> Option<f64> {
        self.recorded_loss_cp.map(|cp| cp as f64 / 100.0)
    }

    /// The distinctive part of the source link, used to recognise a PGN
    /// exported from the same page.
    pub fn link_token(&self) -> &'static str {
        match self.source_url.rsplit_once('?') {
            Some((_, query)) => query,
            None => self.source_url.rsplit('/').next().unwrap_or(self.source_url),
        }
    }
}

fn surname(name: &'static str) -> &'static str {
    name.rsplit(' ').next().unwrap_or(name)
}

const ANCHOR_RIBLI: Anchor = Anchor {
    fen: "3rn1k1/5ppn/1p1P4/1r2pPP1/2q1P3/5BK1/1R5Q/3R4 w q - 0 1",
    sequence: &["Qh7+", "Bxh7", "Rh2+", "Kg8", "Rdh1", "f6", "Rh8+"],
};
const ANCHOR_TATAI: Anchor = Anchor {
    fen: "r3r1k1/1p4bp/6p1/8/1p1qp1b1/P5P1/1PQ1PPBP/R2NK2R b KQq - 0 1",
    sequence: &["Qd3", "exd3", "exd3+", "Kd2", "Re2+"],
};
const ANCHOR_ANAND: Anchor = Anchor {
    fen: "7Q/5kpp/5n2/4n1B1/4q3/5R2/PP4KP/R7 w - - 0 1",
    sequence: &["Qxg7+", "Kxg7", "Bxf6+", "Kg6", "Bxe5"],
};
const ANCHOR_TIMMAN: Anchor = Anchor {
    fen: "2kr1b1r/1pp2ppp/p1P1p3/P3q3/1n6/2N1BB2/1P3PPP/R2Q1RK1 b Qk - 0 1",
    sequence: &["dxc6", "Rxd1", "cxb7+"],
};
const ANCHOR_IMMORTAL: Anchor = Anchor {
    fen: "rq3rk1/3bbp2/p1npp1p1/1p6/2P2P2/1NN3P1/PP1Q1PB1/R3R1K1 w Qq - 0 1",
    sequence: &["Kc5", "dxc5", "Qxd7"],
};

struct Row {
    label: &'static str,
    url: &'static str,
    loss_cp: Option<i32>,
    annotation: &'static str,
    pieces: &'static str,
    event: Option<&'static str>,
    year: Option<u16>,
    site: Option<&'static str>,
    anchor: Option<Anchor>,
}

const fn q(label: &'static str, url: &'static str, loss_cp: Option<i32>, annotation: &'static str, anchor: Option<Anchor>) -> Row {
    Row {
        label,
        url,
        loss_cp,
        annotation,
        pieces: "Q",
        event: None,
        year: None,
        site: None,
        anchor,
    }
}

#[allow(clippy::too_many_arguments)]
const fn r(
    label: &'static str,
    url: &'static str,
    loss_cp: Option<i32>,
    annotation: &'static str,
    pieces: &'static str,
    event: Option<&'static str>,
    year: u16,
    site: Option<&'static str>,
) -> Row {
    Row {
        label,
        url,
        loss_cp,
        annotation,
        pieces,
        event,
        year: Some(year),
        site,
        anchor: None,
    }
}

const QUEENS: [Row; 16] = [
    q("Karpov vs Timman", "https://lichess.org/PfP7BaoG", Some(110), "", Some(ANCHOR_TIMMAN)),
    q("Karpov vs Ribli", "https://lichess.org/vdsAKx53", None, "", Some(ANCHOR_RIBLI)),
    q("Tatai vs Karpov", "https://lichess.org/y7IW9P5S", None, "", Some(ANCHOR_TATAI)),
    q("Karpov vs Nedelin", "https://lichess.org/nSJjooS6", None, "", None),
    q("Cordoba vs Karpov", "https://lichess.org/uzOxZG0w", None, "", None),
    q("Yakovich vs Karpov", "https://lichess.org/5I2u20Dj", Some(100), "", None),
    q("Anand vs Karpov", "https://lichess.org/3WymLrly", None, "", None),
    q("Karpov vs Anand", "https://www.chessgames.com/perl/chessgame?gid=1018838", None, "", Some(ANCHOR_ANAND)),
    // same link as the Dos Hermanas rook/knight row, hence the hints
    Row {
        year: Some(1994),
        site: Some("Dos Hermanas"),
        ..q("Karpov vs Topalov", "https://lichess.org/C5EJgum1", None, "Queens were traded", None)
    },
    q("Karpov vs Gelfand", "https://lichess.org/lMO1qykc", None, "", None),
    q("Karpov vs Campora", "https://lichess.org/07PjVaPW", None, "Both sides sacrificed their Q", None),
    q("Kurajica vs Karpov", "https://lichess.org/ISlTcLWy", None, "Both sides sacrificed their Q", None),
    q("Karpov vs Adianto", "https://lichess.org/MWHXOcjy", None, "", None),
    q("Flores vs Karpov", "https://lichess.org/Ho2zfNYs", Some(210), "", None),
    q("Ghaem Maghami vs Karpov", "https://lichess.org/aUdZ4APF", None, "", None),
    q("Karpov vs Krysztofiak", "https://lichess.org/kj16eXtO", None, "", None),
];

const ROOKS_AND_KNIGHTS: [Row; 16] = [
    Row {
        anchor: Some(ANCHOR_IMMORTAL),
        ..r("Karpov vs Veselin Topalov", "https://lichess.org/aDpwGujT", None, "Karpov's Immortal", "N, R for B later", None, 1994, Some("Linares"))
    },
    r("Karpov vs Viktor Korchnoi", "https://lichess.org/iBDTMAvE", None, "", "P+R", Some("Candidates"), 1974, Some("Moscow")),
    r("Karpov vs Veselin Topalov", "https://lichess.org/C5EJgum1", None, "", "N+B", None, 1994, Some("Dos Hermanas")),
    r("Timman vs Karpov", "https://lichess.org/Bmu7xmiM", None, "", "B + N", None, 1979, Some("Montreal")),
    r("Karpov vs Boris Gulko", "https://lichess.org/8puqZrxa", None, "", "R + N + R", None, 1996, Some("Oropesa del Mar")),
    r("Karpov vs Evgeny Gik", "https://lichess.org/dxmFLb6G", None, "", "R", None, 1968, Some("Moscow")),
    r("Karpov vs Viktor Korchnoi", "https://lichess.org/R6OVhMh2", None, "", "R + R", None, 1971, Some("Leningrad")),
    r("Karpov vs Eldis Cobo Arteaga", "https://lichess.org/Gy6jEE61", None, "", "R", None, 1972, Some("Skopje")),
    r("Karpov vs Boris Spassky", "https://lichess.org/UB6SBmgU", None, "", "R", Some("9th Soviet Match"), 1973, Some("Moscow")),
    r("Karpov vs Miguel A Quinteros", "https://lichess.org/yfHyAUeJ", Some(10), "", "R", Some("Leningrad Interzonal"), 1973, None),
    r("Karpov vs John Nunn", "https://lichess.org/sQUDi8Ep", None, "", "R?", Some("Kings"), 1982, Some("London")),
    r("Seirawan vs Karpov", "https://lichess.org/ECcSN6AQ", Some(10), "", "N+R", None, 1982, Some("Hamburg")),
    r("Karpov vs Gyula Sax", "https://lichess.org/2HirQOej", None, "", "N + R", Some("Linares"), 1983, Some("Linares")),
    r("Timman vs Anatoly Karpov", "https://lichess.org/PrBNVqUJ", None, "", "P+ R", Some("Kings"), 1984, Some("London")),
    r("Kasparov vs Anatoly Karpov", "https://lichess.org/3qhsHSoO", None, "offered free R, declined", "R", Some("World Champ"), 1987, Some("Seville")),
    r("Karpov vs Vladimir P Malaniuk", "https://lichess.org/kRf9JRXf", None, "", "R", Some("55th USSR Champ"), 1988, None),
];

/// SHA-256 of the canonical rendering of every embedded row. Any edit to
/// the data changes it.
pub const CORPUS_CHECKSUM: &str = "cc1bc86e91519c8f43e8899b3deca11ce13e2e7358599cdffcac60d422c6fba5";

fn build(rows: &[Row], bucket: Bucket) -> Vec<CorpusEntry> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| CorpusEntry {
            row: i + 1,
            label: row.label,
            bucket,
            source_url: row.url,
            recorded_verdict: if row.loss_cp.is_some() {
                Verdict::Suboptimal
            } else {
                Verdict::Optimal
            },
            recorded_loss_cp: row.loss_cp,
            annotation: row.annotation,
            pieces: row.pieces,
            event: row.event,
            year: row.year,
            site: row.site,
            anchor: row.anchor,
            scored_side_known: !row.annotation.starts_with("Both sides"),
            game: None,
        })
        .collect()
}

/// All 32 entries: the queen table in order, then the rook/knight table.
pub fn load_corpus() -> Vec<CorpusEntry> {
    let mut entries = build(&QUEENS, Bucket::Queen);
    entries.extend(build(&ROOKS_AND_KNIGHTS, Bucket::RookOrKnight));
    entries
}

/// Checksum over the embedded rows, compared against [`CORPUS_CHECKSUM`].
pub fn corpus_checksum(entries: &[CorpusEntry]) -> String {
    let mut hasher = Sha256::new();
    for e in entries {
        let anchor = e.anchor.map(|a| format!("{}|{}", a.fen, a.sequence.join(" "))).unwrap_or_default();
        let line = format!(
            "{}|{}|{}|{}|{:?}|{}|{}|{}|{:?}|{:?}|{:?}|{}\n",
            e.bucket.as_str(),
            e.row,
            e.label,
            e.source_url,
            e.recorded_loss_cp,
            e.recorded_verdict.as_str(),
            e.annotation,
            e.pieces,
            e.event,
            e.year,
            e.site,
            anchor
        );
        hasher.update(line.as_bytes());
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

// --- ingestion -------------------------------------------------------------

#[derive(Clone, Debug, Default, Serialize)]
pub struct IngestReport {
    /// (entry label with table and row, file) for every attached game.
    pub matched: Vec<(String, PathBuf)>,
    pub unmatched: Vec<String>,
    pub warnings: Vec<String>,
}

fn entry_key(e: &CorpusEntry) -> String {
    format!("{} #{} {}", e.bucket.as_str(), e.row, e.label)
}

fn contains_ci(haystack: &str, needle: &str) -> bool {
    haystack.to_lowercase().contains(&needle.to_lowercase())
}

fn names_match(entry: &CorpusEntry, game: &GameRecord) -> bool {
    let white = game.tag("White").unwrap_or("");
    let black = game.tag("Black").unwrap_or("");
    contains_ci(white, entry.white_surname()) && contains_ci(black, entry.black_surname())
}

fn year_matches(entry: &CorpusEntry, game: &GameRecord) -> bool {
    match (entry.year, game.tag("Date").and_then(|d| d.get(..4)).and_then(|y| y.parse::<u16>().ok())) {
        (Some(want), Some(got)) => want == got,
        _ => true,
    }
}

fn site_matches(entry: &CorpusEntry, game: &GameRecord) -> bool {
    let Some(want) = entry.site else { return true };
    match game.tag("Site") {
        Some(site) if !site.contains("://") && !site.trim().is_empty() && site != "?" => contains_ci(site, want),
        _ => true,
    }
}

fn link_matches(entry: &CorpusEntry, game: &GameRecord) -> bool {
    let token = entry.link_token();
    game.tags().iter().any(|(_, v)| v.contains(token))
}

/// Attaches games from every `*.pgn` file in `dir` (sorted by name) to the
/// entries they belong to. A game matches an entry through the entry's link
/// appearing in any tag, or, for games that carry no corpus link, through
/// both player surnames plus the year and site when those are known. Problems become warnings; nothing is fatal.
pub fn ingest_games(entries: &mut [CorpusEntry], dir: &Path) -> IngestReport {
    let mut report = IngestReport::default();
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgn")))
            .collect(),
        Err(e) => {
            report.warnings.push(format!("cannot read {}: {e}", dir.display()));
            Vec::new()
        }
    };
    files.sort();

    for file in files {
        let text = match std::fs::read_to_string(&file) {
            Ok(t) => t,
            Err(e) => {
                report.warnings.push(format!("{}: {e}", file.display()));
                continue;
            }
        };
        let games = match parse_pgn(&text) {
            Ok(g) => g,
            Err(e) => {
                report.warnings.push(format!("{}: {e}", file.display()));
                continue;
            }
        };
        for game in games {
            // a game carrying a corpus link belongs to that link's rows only
            let linked = entries.iter().any(|e| link_matches(e, &game));
            for entry in entries.iter_mut() {
                let by_link = link_matches(entry, &game);
                let by_names =
                    !linked && names_match(entry, &game) && year_matches(entry, &game) && site_matches(entry, &game);
                if !by_link && !by_names {
                    continue;
                }
                if by_link && !names_match(entry, &game) {
                    report.warnings.push(format!(
                        "{}: linked game {} has players '{}' vs '{}'",
                        entry_key(entry),
                        file.display(),
                        game.tag("White").unwrap_or("?"),
                        game.tag("Black").unwrap_or("?")
                    ));
                }
                if by_link && !year_matches(entry, &game) {
                    report.warnings.push(format!("{}: linked game {} has a different year", entry_key(entry), file.display()));
                }
                if entry.game.is_some() {
                    report
                        .warnings
                        .push(format!("{}: already has a game; ignoring another in {}", entry_key(entry), file.display()));
                    continue;
                }
                entry.game = Some(game.clone());
                report.matched.push((entry_key(entry), file.clone()));
            }
        }
    }
    report.unmatched = entries.iter().filter(|e| e.game.is_none()).map(entry_key).collect();
    report
}

// --- anchors ---------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum MoveStatus {
    Legal,
    Illegal(String),
    /// Not checked because an earlier move failed.
    Unchecked,
}

#[derive(Clone, Debug, Serialize)]
pub struct MoveCheck {
    pub san: &'static str,
    #[serde(flatten)]
    pub status: MoveStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnchorCheck {
    pub label: &'static str,
    pub fen: &'static str,
    pub parse_error: Option<String>,
    /// Repairs the lenient parser made to the printed record.
    pub notes: Vec<String>,
    pub moves: Vec<MoveCheck>,
}

impl AnchorCheck {
    pub fn parsed(&self) -> bool {
        self.parse_error.is_none()
    }

    pub fn all_legal(&self) -> bool {
        self.parsed() && self.moves.iter().all(|m| m.status == MoveStatus::Legal)
    }
}

fn explain_illegal(pos: &Position, san: &str, err: &crate::chess::SanError) -> String {
    let dest = san
        .trim_end_matches(['+', '#', '!', '?'])
        .get(san.trim_end_matches(['+', '#', '!', '?']).len().saturating_sub(2)..)
        .and_then(crate::chess::Square::parse);
    match dest.and_then(|sq| pos.piece_at(sq).map(|p| (sq, p))) {
        Some((sq, p)) => format!("{err}; {sq} holds a {} {}", p.color.name(), p.role.name()),
        None => err.to_string(),
    }
}

/// Parses each anchor position and replays its printed sequence, move by
/// move. Failures are rows in the result, never errors.
pub fn verify_anchors(entries: &[CorpusEntry]) -> Vec<AnchorCheck> {
    entries
        .iter()
        .filter_map(|e| e.anchor.map(|a| (e.label, a)))
        .map(|(label, anchor)| {
            let mut check = AnchorCheck {
                label,
                fen: anchor.fen,
                parse_error: None,
                notes: Vec::new(),
                moves: Vec::new(),
            };
            let mut pos = match parse_fen_with(anchor.fen, FenOptions { lenient: true }) {
                Ok((pos, notes)) => {
                    check.notes = notes.iter().map(FenNote::to_string).collect();
                    Some(pos)
                }
                Err(e) => {
                    check.parse_error = Some(e.to_string());
                    None
                }
            };
            for &san in anchor.sequence {
                let status = match pos {
                    None => MoveStatus::Unchecked,
                    Some(p) => match parse_san(&p, san) {
                        Ok(m) => {
                            pos = Some(p.play_unchecked(&m));
                            MoveStatus::Legal
                        }
                        Err(err) => {
                            pos = None;
                            MoveStatus::Illegal(explain_illegal(&p, san, &err))
                        }
                    },
                };
                check.moves.push(MoveCheck { san, status });
            }
            check
        })
        .collect()
}

impl fmt::Display for AnchorCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.label)?;
        writeln!(f, "  {}", self.fen)?;
        match &self.parse_error {
            Some(e) => writeln!(f, "  FEN rejected: {e}")?,
            None => writeln!(f, "  FEN ok")?,
        }
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        for m in &self.moves {
            match &m.status {
                MoveStatus::Legal => writeln!(f, "  {:<7} legal", m.san)?,
                MoveStatus::Illegal(why) => writeln!(f, "  {:<7} ILLEGAL: {why}", m.san)?,
                MoveStatus::Unchecked => writeln!(f, "  {:<7} not checked", m.san)?,
            }
        }
        Ok(())
    }
}
