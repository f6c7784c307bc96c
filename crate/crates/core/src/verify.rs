//! Checks a [`FixtureSet`] against concrete runs and exact algebra.

use std::time::Instant;

use serde::Serialize;

use crate::affine::affine_intersection;
use crate::certify::sample_points;
use crate::fixtures::{CornerFixture, FixtureSet, PieceFixture, Tier};
use crate::rational::Rational;
use crate::trajectory::{run_trajectory, RunLimit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// A grouped alternative that lost to another member of its group.
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Piece,
    Corner,
    CornerSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleOutcome {
    pub point: Rational,
    pub expected_m: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_m: Option<Rational>,
    #[serde(rename = "observed_L", skip_serializing_if = "Option::is_none")]
    pub observed_len: Option<usize>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureOutcome {
    pub id: String,
    pub kind: FixtureKind,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<SampleOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupOutcome {
    pub id: String,
    pub status: Status,
    /// The one candidate the exact intersection supports.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supported: Option<Rational>,
    /// Concrete sample strictly between the candidates and whether it
    /// follows the side the supported candidate predicts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_sample: Option<SampleOutcome>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tier: Tier,
    pub fixtures: Vec<FixtureOutcome>,
    pub groups: Vec<GroupOutcome>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub wall_ms: f64,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn fixture(&self, id: &str) -> Option<&FixtureOutcome> {
        self.fixtures.iter().find(|f| f.id == id)
    }

    pub fn group(&self, id: &str) -> Option<&GroupOutcome> {
        self.groups.iter().find(|g| g.id == id)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub tier: Tier,
    pub samples: usize,
    pub limit: RunLimit,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tier: Tier::Quick,
            samples: 3,
            limit: RunLimit::default(),
        }
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn sample(point: Rational, p: &PieceFixture, limit: RunLimit) -> (SampleOutcome, Option<String>) {
    let expected_m = p.m.eval(&point);
    match run_trajectory(&point, limit) {
        Ok(t) => {
            let len_ok = p.expected_len.is_none_or(|l| l == t.len);
            let ok = t.m == expected_m && len_ok;
            let detail = (!len_ok).then(|| format!("L = {} at {point}", t.len));
            (
                SampleOutcome {
                    point,
                    expected_m,
                    observed_m: Some(t.m),
                    observed_len: Some(t.len),
                    ok,
                },
                detail,
            )
        }
        Err(e) => {
            let detail = Some(e.to_string());
            (
                SampleOutcome {
                    point,
                    expected_m,
                    observed_m: None,
                    observed_len: None,
                    ok: false,
                },
                detail,
            )
        }
    }
}

fn check_piece(p: &PieceFixture, opts: &VerifyOptions) -> FixtureOutcome {
    let start = Instant::now();
    if p.tier > opts.tier {
        return FixtureOutcome {
            id: p.id.clone(),
            kind: FixtureKind::Piece,
            status: Status::Skipped,
            samples: Vec::new(),
            detail: Some("long tier".into()),
            wall_ms: 0.0,
        };
    }
    let mut samples = Vec::new();
    let mut detail = None;
    for point in sample_points(&p.interval, opts.samples) {
        let (s, d) = sample(point, p, opts.limit);
        detail = detail.or(d);
        samples.push(s);
    }
    let status = if samples.iter().all(|s| s.ok) {
        Status::Pass
    } else {
        Status::Fail
    };
    FixtureOutcome {
        id: p.id.clone(),
        kind: FixtureKind::Piece,
        status,
        samples,
        detail,
        wall_ms: ms_since(start),
    }
}

fn corner_forms<'a>(
    set: &'a FixtureSet,
    c: &CornerFixture,
) -> (&'a PieceFixture, &'a PieceFixture) {
    (
        set.piece(&c.left).expect("validated on load"),
        set.piece(&c.right).expect("validated on load"),
    )
}

fn check_corner(set: &FixtureSet, c: &CornerFixture) -> FixtureOutcome {
    let start = Instant::now();
    let (l, r) = corner_forms(set, c);
    let meet = affine_intersection(&l.m, &r.m);
    let (status, detail) = match &meet {
        Some(x) if *x == c.point => (Status::Pass, None),
        Some(x) => (Status::Fail, Some(format!("forms meet at {x}"))),
        None => (Status::Fail, Some("forms are parallel".to_string())),
    };
    FixtureOutcome {
        id: c.id.clone(),
        kind: FixtureKind::Corner,
        status,
        samples: Vec::new(),
        detail,
        wall_ms: ms_since(start),
    }
}

fn check_group(
    set: &FixtureSet,
    name: &str,
    members: &[&CornerFixture],
    outcomes: &mut [FixtureOutcome],
    limit: RunLimit,
) -> GroupOutcome {
    let passing: Vec<&&CornerFixture> = members
        .iter()
        .filter(|c| {
            outcomes
                .iter()
                .any(|o| o.id == c.id && o.status == Status::Pass)
        })
        .collect();
    let fail = |detail: String| GroupOutcome {
        id: name.to_string(),
        status: Status::Fail,
        supported: None,
        gap_sample: None,
        detail,
    };
    let [winner] = passing.as_slice() else {
        return fail(format!(
            "{} alternatives hold, expected exactly one",
            passing.len()
        ));
    };
    for o in outcomes.iter_mut() {
        if o.status == Status::Fail && members.iter().any(|c| c.id == o.id) {
            o.status = Status::Rejected;
        }
    }

    // Between the winner and its nearest rival, m must follow the form on
    // the far side of the winner.
    let rival = members
        .iter()
        .filter(|c| c.id != winner.id)
        .min_by_key(|c| (&c.point - &winner.point).abs())
        .expect("groups have two members");
    let gap = winner.point.midpoint(&rival.point);
    let (l, r) = corner_forms(set, winner);
    let side = if rival.point > winner.point { r } else { l };
    let (outcome, err) = sample(gap, side, limit);
    let status = if outcome.ok {
        Status::Pass
    } else {
        Status::Fail
    };
    GroupOutcome {
        id: name.to_string(),
        status,
        supported: Some(winner.point.clone()),
        detail: err.unwrap_or_else(|| {
            format!(
                "{} holds; {} is rejected and a run at {} follows {}",
                winner.point, rival.point, outcome.point, side.id
            )
        }),
        gap_sample: Some(outcome),
    }
}

/// Runs every fixture of `set` up to `opts.tier`.
pub fn verify(set: &FixtureSet, opts: &VerifyOptions) -> VerifyReport {
    let start = Instant::now();
    let mut fixtures: Vec<FixtureOutcome> =
        set.pieces.iter().map(|p| check_piece(p, opts)).collect();
    let mut corners: Vec<FixtureOutcome> =
        set.corners.iter().map(|c| check_corner(set, c)).collect();
    let groups: Vec<GroupOutcome> = set
        .groups()
        .iter()
        .map(|(name, members)| check_group(set, name, members, &mut corners, opts.limit))
        .collect();

    if let Some(cs) = &set.corner_set {
        let t = Instant::now();
        let confirmed: Vec<&Rational> = set
            .corners
            .iter()
            .zip(&corners)
            .filter(|(_, o)| o.status == Status::Pass)
            .map(|(c, _)| &c.point)
            .collect();
        let missing: Vec<String> = cs
            .points
            .iter()
            .filter(|p| !confirmed.contains(p))
            .map(|p| p.to_string())
            .collect();
        corners.push(FixtureOutcome {
            id: cs.id.clone(),
            kind: FixtureKind::CornerSet,
            status: if missing.is_empty() {
                Status::Pass
            } else {
                Status::Fail
            },
            samples: Vec::new(),
            detail: (!missing.is_empty()).then(|| format!("unconfirmed: {}", missing.join(", "))),
            wall_ms: ms_since(t),
        });
    }
    fixtures.extend(corners);

    let count = |s: Status| fixtures.iter().filter(|f| f.status == s).count();
    let group_failures = groups.iter().filter(|g| g.status == Status::Fail).count();
    VerifyReport {
        tier: opts.tier,
        passed: count(Status::Pass),
        failed: count(Status::Fail) + group_failures,
        skipped: count(Status::Skipped),
        fixtures,
        groups,
        wall_ms: ms_since(start),
    }
}
