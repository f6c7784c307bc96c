//! One-object-per-line encoding of sweep pieces.
//!
//! ```text
//! {"kind":"atom","interval":{"lo":"1/2","hi":"1897/3762","lo_closed":false,"hi_closed":true},"L":73,"m":{"a":"333/8","b":"-325/16"},"driving_len":73}
//! ```
//!
//! A singleton carries its value of `m` as the constant form `(0, m)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::AffineForm;
use crate::certify::{Atom, Piece, PieceLike, PieceValue, SingletonPiece};
use crate::chain::DrivingList;
use crate::interval::RInterval;
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("malformed piece record: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent piece record: {0}")]
    Invalid(&'static str),
    #[error("atom record has no driving list")]
    MissingDriving,
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<RecordError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    Atom,
    Singleton,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord", into = "RawRecord")]
pub struct PieceRecord {
    kind: PieceKind,
    interval: RInterval,
    len: usize,
    m: AffineForm,
    driving_len: usize,
    driving: Option<DrivingList>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    kind: PieceKind,
    interval: RInterval,
    #[serde(rename = "L")]
    len: usize,
    m: AffineForm,
    driving_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    driving: Option<DrivingList>,
}

impl TryFrom<RawRecord> for PieceRecord {
    type Error = RecordError;
    fn try_from(r: RawRecord) -> Result<Self, Self::Error> {
        if r.len < 4 {
            return Err(RecordError::Invalid("L below 4"));
        }
        if r.driving_len != r.len {
            return Err(RecordError::Invalid("driving_len differs from L"));
        }
        match r.kind {
            PieceKind::Singleton => {
                if !r.interval.is_point() {
                    return Err(RecordError::Invalid("singleton interval is not a point"));
                }
                if !r.m.a.is_zero() {
                    return Err(RecordError::Invalid("singleton value is not constant"));
                }
                if r.driving.is_some() {
                    return Err(RecordError::Invalid("singleton carries a driving list"));
                }
            }
            PieceKind::Atom => {
                if r.interval.is_point() {
                    return Err(RecordError::Invalid("atom interval is a single point"));
                }
                if r.driving.as_ref().is_some_and(|d| d.len() != r.len) {
                    return Err(RecordError::Invalid("driving list length differs from L"));
                }
            }
        }
        Ok(PieceRecord {
            kind: r.kind,
            interval: r.interval,
            len: r.len,
            m: r.m,
            driving_len: r.driving_len,
            driving: r.driving,
        })
    }
}

impl From<PieceRecord> for RawRecord {
    fn from(r: PieceRecord) -> Self {
        RawRecord {
            kind: r.kind,
            interval: r.interval,
            len: r.len,
            m: r.m,
            driving_len: r.driving_len,
            driving: r.driving,
        }
    }
}

impl PieceRecord {
    pub fn from_piece(piece: &Piece, with_driving: bool) -> Self {
        match piece {
            Piece::Atom(a) => PieceRecord {
                kind: PieceKind::Atom,
                interval: a.interval.clone(),
                len: a.len,
                m: a.m_form.clone(),
                driving_len: a.driving.len(),
                driving: with_driving.then(|| a.driving.clone()),
            },
            Piece::Singleton(s) => PieceRecord {
                kind: PieceKind::Singleton,
                interval: s.interval.clone(),
                len: s.len,
                m: AffineForm::constant(s.m.clone()),
                driving_len: s.len,
                driving: None,
            },
        }
    }

    pub fn kind(&self) -> PieceKind {
        self.kind
    }

    pub fn m(&self) -> &AffineForm {
        &self.m
    }

    pub fn driving(&self) -> Option<&DrivingList> {
        self.driving.as_ref()
    }

    /// Same record with the interval's closure flags replaced.
    pub fn with_closure(&self, lo_closed: bool, hi_closed: bool) -> Option<Self> {
        let interval = self.interval.with_closure(lo_closed, hi_closed).ok()?;
        Some(PieceRecord {
            interval,
            ..self.clone()
        })
    }

    /// The encoded line, without a trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }

    pub fn parse_line(line: &str) -> Result<Self, RecordError> {
        Ok(serde_json::from_str(line)?)
    }

    pub fn into_piece(self) -> Result<Piece, RecordError> {
        match self.kind {
            PieceKind::Atom => Ok(Piece::Atom(Atom {
                interval: self.interval,
                len: self.len,
                m_form: self.m,
                driving: self.driving.ok_or(RecordError::MissingDriving)?,
            })),
            PieceKind::Singleton => Ok(Piece::Singleton(SingletonPiece {
                interval: self.interval,
                len: self.len,
                m: self.m.b,
            })),
        }
    }

    /// Value of `m` at a singleton's point.
    pub fn point_value(&self) -> Option<&Rational> {
        (self.kind == PieceKind::Singleton).then_some(&self.m.b)
    }
}

impl PieceLike for PieceRecord {
    fn interval(&self) -> &RInterval {
        &self.interval
    }
    fn len(&self) -> usize {
        self.len
    }
    fn value(&self) -> PieceValue<'_> {
        match self.kind {
            PieceKind::Atom => PieceValue::Form(&self.m),
            PieceKind::Singleton => PieceValue::Point(&self.m.b),
        }
    }
}

/// Decodes a whole piece stream, one record per non-empty line.
pub fn parse_stream(text: &str) -> Result<Vec<PieceRecord>, RecordError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            PieceRecord::parse_line(l).map_err(|e| RecordError::AtLine {
                line: i + 1,
                source: Box::new(e),
            })
        })
        .collect()
}
