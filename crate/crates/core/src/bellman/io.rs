//! Binary table files.
//!
//! All integers little-endian:
//!
//! ```text
//! magic       4  "SCTB"
//! version     u16 = 1
//! model       u8  0 adversarial, 1 stochastic
//! defender    u8  0 white, 1 black (0 for adversarial)
//! symmetry    u8  1 if states are symmetry representatives
//! spec_len    u8
//! spec        spec_len bytes of ASCII, e.g. "KQvK"
//! states      u32
//! iterations  u32
//! records     `states` records in ascending state-code order
//! ```
//!
//! An adversarial record is 3 bytes: `i8` result for white (+1, 0, -1)
//! then `u16` distance to mate in plies (0xFFFF for draws). A stochastic
//! record is one `f64`, the expected result for white.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{EndgameSpec, EndgameValueTable, OpponentModel, Outcome, Values};
use crate::chess::Color;

pub const TABLE_MAGIC: &[u8; 4] = b"SCTB";
const VERSION: u16 = 1;
const NO_DTM: u16 = u16::MAX;

#[derive(Debug, Error)]
pub enum TableFormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a table file")]
    Magic,
    #[error("unsupported table version {0}")]
    Version(u16),
    #[error("corrupt table: {0}")]
    Corrupt(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Records {
    /// (result for white, distance to mate)
    Exact(Vec<(i8, Option<u16>)>),
    Expected(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoredTable {
    pub spec: EndgameSpec,
    pub model: OpponentModel,
    pub symmetry: bool,
    pub iterations: u32,
    pub records: Records,
}

impl EndgameValueTable {
    /// The table as it would be written to disk.
    pub fn to_stored(&self) -> StoredTable {
        let records = match &self.values {
            Values::Exact(v) => Records::Exact(
                v.iter()
                    .enumerate()
                    .map(|(i, &score)| {
                        let stm = self.space.position(i).side_to_move();
                        let o = Outcome::from_score(score);
                        let white = (o.sign() * stm.sign()) as i8;
                        (white, o.dtm().map(|d| d.min(NO_DTM as u32 - 1) as u16))
                    })
                    .collect(),
            ),
            Values::Expected(v) => Records::Expected(v.clone()),
        };
        StoredTable {
            spec: self.spec.clone(),
            model: self.model,
            symmetry: self.space.symmetry,
            iterations: self.iterations,
            records,
        }
    }
}

pub fn write_table(table: &EndgameValueTable, out: &mut impl Write) -> io::Result<()> {
    let stored = table.to_stored();
    out.write_all(TABLE_MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    let (model, defender) = match stored.model {
        OpponentModel::Adversarial => (0u8, 0u8),
        OpponentModel::Stochastic { defender } => (1, defender.index() as u8),
    };
    out.write_all(&[model, defender, stored.symmetry as u8])?;
    let spec = stored.spec.to_string();
    out.write_all(&[spec.len() as u8])?;
    out.write_all(spec.as_bytes())?;
    let n = match &stored.records {
        Records::Exact(r) => r.len(),
        Records::Expected(r) => r.len(),
    };
    out.write_all(&(n as u32).to_le_bytes())?;
    out.write_all(&stored.iterations.to_le_bytes())?;
    match &stored.records {
        Records::Exact(r) => {
            for &(w, dtm) in r {
                out.write_all(&[w as u8])?;
                out.write_all(&dtm.unwrap_or(NO_DTM).to_le_bytes())?;
            }
        }
        Records::Expected(r) => {
            for v in r {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn take<const N: usize>(input: &mut impl Read) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_table(input: &mut impl Read) -> Result<StoredTable, TableFormatError> {
    if &take::<4>(input)? != TABLE_MAGIC {
        return Err(TableFormatError::Magic);
    }
    let version = u16::from_le_bytes(take(input)?);
    if version != VERSION {
        return Err(TableFormatError::Version(version));
    }
    let [model, defender, symmetry, spec_len] = take::<4>(input)?;
    let mut spec = vec![0u8; spec_len as usize];
    input.read_exact(&mut spec)?;
    let spec: EndgameSpec = std::str::from_utf8(&spec)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| TableFormatError::Corrupt("bad spec".into()))?;
    let model = match (model, defender) {
        (0, _) => OpponentModel::Adversarial,
        (1, 0) => OpponentModel::Stochastic { defender: Color::White },
        (1, 1) => OpponentModel::Stochastic { defender: Color::Black },
        _ => return Err(TableFormatError::Corrupt(format!("model byte {model}"))),
    };
    let n = u32::from_le_bytes(take(input)?) as usize;
    let iterations = u32::from_le_bytes(take(input)?);
    let records = match model {
        OpponentModel::Adversarial => {
            let mut r = Vec::with_capacity(n);
            for _ in 0..n {
                let [w, lo, hi] = take::<3>(input)?;
                let dtm = u16::from_le_bytes([lo, hi]);
                r.push((w as i8, (dtm != NO_DTM).then_some(dtm)));
            }
            Records::Exact(r)
        }
        OpponentModel::Stochastic { .. } => {
            let mut r = Vec::with_capacity(n);
            for _ in 0..n {
                r.push(f64::from_le_bytes(take(input)?));
            }
            Records::Expected(r)
        }
    };
    Ok(StoredTable {
        spec,
        model,
        symmetry: symmetry != 0,
        iterations,
        records,
    })
}
