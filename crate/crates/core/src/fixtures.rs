//! Known pieces and corners of `m`, read from a TOML file.
//!
//! The built-in set is compiled in from `fixtures/known_pieces.toml`; the
//! file's header comment documents the schema.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::AffineForm;
use crate::interval::RInterval;
use crate::rational::Rational;

pub const BUILTIN_FIXTURES: &str = include_str!("../fixtures/known_pieces.toml");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed fixture file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("fixture id {0:?} is used twice")]
    DuplicateId(String),
    #[error("corner {corner:?} refers to unknown piece {piece:?}")]
    UnknownPiece { corner: String, piece: String },
    #[error("piece {0:?} lies on the wrong side of its anchor")]
    MisplacedAnchor(String),
    #[error("group {0:?} needs at least two alternatives")]
    LonelyGroup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Quick,
    Long,
}

impl std::str::FromStr for Tier {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quick" => Ok(Tier::Quick),
            "long" | "full" => Ok(Tier::Long),
            other => Err(format!("unknown tier {other:?}, expected quick or full")),
        }
    }
}

/// Where a piece sits relative to its anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureSide {
    /// The interval lies at or left of the anchor.
    Left,
    /// The interval lies at or right of the anchor.
    Right,
    /// The anchor lies inside the interval.
    Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceFixture {
    pub id: String,
    pub anchor: Rational,
    pub side: FixtureSide,
    pub interval: RInterval,
    pub m: AffineForm,
    #[serde(
        rename = "expected_L",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub expected_len: Option<usize>,
    pub tier: Tier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerFixture {
    pub id: String,
    pub point: Rational,
    pub left: String,
    pub right: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerSet {
    pub id: String,
    pub points: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSet {
    #[serde(default, rename = "piece")]
    pub pieces: Vec<PieceFixture>,
    #[serde(default, rename = "corner")]
    pub corners: Vec<CornerFixture>,
    #[serde(default)]
    pub corner_set: Option<CornerSet>,
}

impl FixtureSet {
    pub fn parse(text: &str) -> Result<Self, FixtureError> {
        let set: FixtureSet = toml::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, FixtureError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_FIXTURES).expect("built-in fixtures are valid")
    }

    pub fn piece(&self, id: &str) -> Option<&PieceFixture> {
        self.pieces.iter().find(|p| p.id == id)
    }

    /// Grouped corners by group name, in file order.
    pub fn groups(&self) -> BTreeMap<&str, Vec<&CornerFixture>> {
        let mut out: BTreeMap<&str, Vec<&CornerFixture>> = BTreeMap::new();
        for c in &self.corners {
            if let Some(g) = &c.group {
                out.entry(g.as_str()).or_default().push(c);
            }
        }
        out
    }

    fn validate(&self) -> Result<(), FixtureError> {
        let mut ids = HashSet::new();
        let all_ids = self
            .pieces
            .iter()
            .map(|p| &p.id)
            .chain(self.corners.iter().map(|c| &c.id))
            .chain(self.corner_set.iter().map(|s| &s.id));
        for id in all_ids {
            if !ids.insert(id.as_str()) {
                return Err(FixtureError::DuplicateId(id.clone()));
            }
        }
        for p in &self.pieces {
            let placed = match p.side {
                FixtureSide::Left => *p.interval.hi() <= p.anchor,
                FixtureSide::Right => *p.interval.lo() >= p.anchor,
                FixtureSide::Interval => p.interval.contains(&p.anchor),
            };
            if !placed {
                return Err(FixtureError::MisplacedAnchor(p.id.clone()));
            }
        }
        for c in &self.corners {
            for piece in [&c.left, &c.right] {
                if self.piece(piece).is_none() {
                    return Err(FixtureError::UnknownPiece {
                        corner: c.id.clone(),
                        piece: piece.clone(),
                    });
                }
            }
        }
        for (name, members) in self.groups() {
            if members.len() < 2 {
                return Err(FixtureError::LonelyGroup(name.to_string()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn builtin_set_loads() {
        let set = FixtureSet::builtin();
        // sixteen anchors with two sides, six plus four pieces near the ends, one more
        assert_eq!(set.pieces.len(), 32 + 6 + 4 + 1);
        assert_eq!(set.corner_set.as_ref().unwrap().points.len(), 17);
        let p = set.piece("near-4/7-right").unwrap();
        assert_eq!(p.m, AffineForm::new(q("202033/16"), q("-7214")));
        assert_eq!(p.interval.to_string(), "[4/7, 44485228/77846827]");
        assert_eq!(set.piece("around-10/19").unwrap().expected_len, Some(47));
        let long: Vec<_> = set
            .pieces
            .iter()
            .filter(|p| p.tier == Tier::Long)
            .map(|p| p.id.as_str())
            .collect();
        assert_eq!(
            long,
            [
                "near-1/2-piece-4",
                "near-1/2-piece-5",
                "near-1/2-piece-6",
                "near-8/13-left",
                "near-8/13-right"
            ]
        );
        assert_eq!(set.groups()["resume-point-near-1/2"].len(), 2);
    }

    fn piece(id: &str, lo: &str, hi: &str, side: &str) -> String {
        format!(
            "[[piece]]\nid = \"{id}\"\nanchor = \"1/2\"\nside = \"{side}\"\n\
             interval = {{ lo = \"{lo}\", hi = \"{hi}\", lo_closed = true, hi_closed = true }}\n\
             m = {{ a = \"1\", b = \"0\" }}\ntier = \"quick\"\n"
        )
    }

    #[test]
    fn invalid_sets_are_rejected() {
        let ok = piece("a", "1/2", "3/5", "right");
        assert!(FixtureSet::parse(&ok).is_ok());

        let dup = format!("{ok}{ok}");
        assert!(matches!(
            FixtureSet::parse(&dup),
            Err(FixtureError::DuplicateId(_))
        ));

        let misplaced = piece("b", "1/3", "1/2", "right");
        assert!(matches!(
            FixtureSet::parse(&misplaced),
            Err(FixtureError::MisplacedAnchor(_))
        ));

        let dangling =
            format!("{ok}[[corner]]\nid = \"c\"\npoint = \"1/2\"\nleft = \"a\"\nright = \"zz\"\n");
        assert!(matches!(
            FixtureSet::parse(&dangling),
            Err(FixtureError::UnknownPiece { .. })
        ));

        let lonely = format!("{ok}[[corner]]\nid = \"c\"\npoint = \"1/2\"\nleft = \"a\"\nright = \"a\"\ngroup = \"g\"\n");
        assert!(matches!(
            FixtureSet::parse(&lonely),
            Err(FixtureError::LonelyGroup(_))
        ));

        for bad in [
            "[[piece]]\nid = 3\n",
            &ok.replace("quick", "slow"),
            &ok.replace("\"3/5\"", "\"3/0\""),
            &format!("{ok}surprise = 1\n"),
        ] {
            assert!(
                matches!(FixtureSet::parse(bad), Err(FixtureError::Toml(_))),
                "{bad}"
            );
        }
    }
}
