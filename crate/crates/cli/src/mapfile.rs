//! JSON map documents: `{"rank": e, "d": d, "entries": [{"residue": [..], "m": M, "r": [..]}, ..]}`.
//!
//! Integers may be JSON numbers or decimal strings, so multipliers and shifts
//! beyond 64 bits survive a round trip.

use lattice_collatz::mapcore::MapEntry;
use lattice_collatz::{validate_map, CollatzMap, Error, MapDescription};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntValue {
    Number(i64),
    Text(String),
}

impl IntValue {
    pub fn from_big(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => IntValue::Number(v),
            None => IntValue::Text(x.to_string()),
        }
    }

    fn to_big(&self) -> Option<BigInt> {
        match self {
            IntValue::Number(v) => Some(BigInt::from(*v)),
            IntValue::Text(s) => s.trim().parse().ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDocument {
    pub residue: Vec<i64>,
    pub m: IntValue,
    pub r: Vec<IntValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpecDocument {
    pub rank: usize,
    pub d: i64,
    pub entries: Vec<EntryDocument>,
}

#[derive(Debug, thiserror::Error)]
pub enum MapFileError {
    #[error("malformed map document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("entry {index}: {message}")]
    Entry { index: usize, message: String },
    #[error("{context}{source}")]
    Invalid {
        context: String,
        #[source]
        source: Error,
    },
}

impl MapSpecDocument {
    pub fn from_map(map: &CollatzMap) -> Self {
        let entries = map
            .residues()
            .map(|w| EntryDocument {
                residue: w.rep().iter().map(|&c| c as i64).collect(),
                m: IntValue::from_big(map.multiplier(&w)),
                r: map.shift(&w).coords().iter().map(IntValue::from_big).collect(),
            })
            .collect();
        MapSpecDocument {
            rank: map.rank(),
            d: map.modulus() as i64,
            entries,
        }
    }

    pub fn to_map(&self) -> Result<CollatzMap, MapFileError> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (index, e) in self.entries.iter().enumerate() {
            let bad = |what: &str, v: &IntValue| MapFileError::Entry {
                index,
                message: format!("{what} {v:?} is not an integer"),
            };
            let multiplier = e.m.to_big().ok_or_else(|| bad("m", &e.m))?;
            let shift = e
                .r
                .iter()
                .map(|v| v.to_big().ok_or_else(|| bad("r coordinate", v)))
                .collect::<Result<Vec<_>, _>>()?;
            entries.push(MapEntry {
                residue: e.residue.iter().map(|&c| BigInt::from(c)).collect(),
                multiplier,
                shift,
            });
        }
        let desc = MapDescription {
            rank: self.rank,
            modulus: self.d,
            entries,
        };
        validate_map(&desc).map_err(|source| MapFileError::Invalid {
            context: self.locate(&source),
            source,
        })
    }

    /// Names the offending entry for errors that concern a single table row.
    fn locate(&self, err: &Error) -> String {
        fn same(e: &EntryDocument, rep: &[u64]) -> bool {
            e.residue.len() == rep.len() && e.residue.iter().zip(rep).all(|(&a, &b)| a == b as i64)
        }
        let index = match err {
            Error::DuplicateResidue(rep) => self
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| same(e, rep))
                .map(|(i, _)| i)
                .nth(1),
            Error::Divisibility { residue: rep, .. } | Error::NonpositiveMultiplier(rep) => {
                self.entries.iter().position(|e| same(e, rep))
            }
            Error::ResidueOutOfRange(rep) => self
                .entries
                .iter()
                .position(|e| e.residue.iter().map(|&c| BigInt::from(c)).eq(rep.iter().cloned())),
            Error::RankMismatch { .. } => self
                .entries
                .iter()
                .position(|e| e.residue.len() != self.rank || e.r.len() != self.rank),
            _ => None,
        };
        match index {
            Some(i) => format!("entry {i} (residue {:?}): ", self.entries[i].residue),
            None => String::new(),
        }
    }
}

pub fn parse_map_document(text: &str) -> Result<CollatzMap, MapFileError> {
    let doc: MapSpecDocument = serde_json::from_str(text)?;
    doc.to_map()
}

pub fn emit_map_document(map: &CollatzMap) -> String {
    serde_json::to_string_pretty(&MapSpecDocument::from_map(map)).expect("document serializes")
}
