use thiserror::Error;

use super::{Atom, Piece, Side, SingletonPiece};
use crate::affine::AffineForm;
use crate::interval::RInterval;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    /// `form` is the form in force before `point`; `observed` is the value
    /// of `m` at `point` on the piece that follows.
    #[error("m is discontinuous at {point}: {form} does not reach {observed} there")]
    DiscontinuityDetected {
        point: Rational,
        form: AffineForm,
        observed: Rational,
    },
    #[error("pieces {prev} and {next} do not tile: {detail}")]
    NotContiguous {
        prev: RInterval,
        next: RInterval,
        detail: &'static str,
    },
    #[error("piece stream contains no atoms")]
    NoAtoms,
}

/// How `m` is known on a piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceValue<'a> {
    Form(&'a AffineForm),
    Point(&'a Rational),
}

/// Read-only view shared by in-memory pieces and decoded stream records.
/// `len` is the stopping index `L`, not a size.
#[allow(clippy::len_without_is_empty)]
pub trait PieceLike {
    fn interval(&self) -> &RInterval;
    fn len(&self) -> usize;
    fn value(&self) -> PieceValue<'_>;
}

impl PieceLike for Atom {
    fn interval(&self) -> &RInterval {
        &self.interval
    }
    fn len(&self) -> usize {
        self.len
    }
    fn value(&self) -> PieceValue<'_> {
        PieceValue::Form(&self.m_form)
    }
}

impl PieceLike for SingletonPiece {
    fn interval(&self) -> &RInterval {
        &self.interval
    }
    fn len(&self) -> usize {
        self.len
    }
    fn value(&self) -> PieceValue<'_> {
        PieceValue::Point(&self.m)
    }
}

impl PieceLike for Piece {
    fn interval(&self) -> &RInterval {
        match self {
            Piece::Atom(a) => a.interval(),
            Piece::Singleton(s) => s.interval(),
        }
    }
    fn len(&self) -> usize {
        match self {
            Piece::Atom(a) => a.len,
            Piece::Singleton(s) => s.len,
        }
    }
    fn value(&self) -> PieceValue<'_> {
        match self {
            Piece::Atom(a) => a.value(),
            Piece::Singleton(s) => s.value(),
        }
    }
}

/// Maximal run of pieces with the same `L` inside one segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subinterval<P> {
    pub interval: RInterval,
    pub len: usize,
    pub pieces: Vec<P>,
}

/// Maximal run of pieces on which `m` is the single form `m_form`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment<P> {
    pub interval: RInterval,
    pub m_form: AffineForm,
    pub subintervals: Vec<Subinterval<P>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate<P> {
    pub direction: Side,
    pub segments: Vec<Segment<P>>,
    /// Boundaries between consecutive segments, in sweep order. Each is the
    /// exact intersection of the two adjacent forms.
    pub corners: Vec<Rational>,
}

impl<P> Aggregate<P> {
    pub fn subintervals(&self) -> impl Iterator<Item = &Subinterval<P>> {
        self.segments.iter().flat_map(|s| s.subintervals.iter())
    }

    /// Endpoint of `interval` where the sweep entered it.
    pub fn start_of<'a>(&self, interval: &'a RInterval) -> &'a Rational {
        match self.direction {
            Side::Right => interval.lo(),
            Side::Left => interval.hi(),
        }
    }
}

fn near_far(i: &RInterval, dir: Side) -> ((&Rational, bool), (&Rational, bool)) {
    let lo = (i.lo(), i.lo_closed());
    let hi = (i.hi(), i.hi_closed());
    match dir {
        Side::Right => (lo, hi),
        Side::Left => (hi, lo),
    }
}

/// Smallest interval covering all of `items`, keeping their end closures.
fn hull<'a>(mut items: impl Iterator<Item = &'a RInterval>) -> RInterval {
    let first = items.next().expect("non-empty group");
    let (mut lo, mut lo_c, mut hi, mut hi_c) = (
        first.lo().clone(),
        first.lo_closed(),
        first.hi().clone(),
        first.hi_closed(),
    );
    for i in items {
        if *i.lo() < lo || (*i.lo() == lo && i.lo_closed()) {
            lo = i.lo().clone();
            lo_c = i.lo_closed();
        }
        if *i.hi() > hi || (*i.hi() == hi && i.hi_closed()) {
            hi = i.hi().clone();
            hi_c = i.hi_closed();
        }
    }
    RInterval::new(lo, hi, lo_c, hi_c).expect("hull of valid intervals")
}

fn check_tiling<P: PieceLike>(pieces: &[P], dir: Side) -> Result<(), AggregateError> {
    for w in pieces.windows(2) {
        let (prev, next) = (w[0].interval(), w[1].interval());
        let (_, (far, far_closed)) = near_far(prev, dir);
        let ((near, near_closed), _) = near_far(next, dir);
        let detail = if far != near {
            Some("gap or overlap between endpoints")
        } else if far_closed && near_closed {
            Some("shared endpoint claimed twice")
        } else if !far_closed && !near_closed {
            Some("shared endpoint left uncovered")
        } else {
            None
        };
        if let Some(detail) = detail {
            return Err(AggregateError::NotContiguous {
                prev: prev.clone(),
                next: next.clone(),
                detail,
            });
        }
    }
    Ok(())
}

/// Groups a contiguous piece stream (in sweep order) into segments of one
/// affine form, each split into subintervals of one length, and validates
/// every corner as the intersection of the adjacent forms.
pub fn aggregate<P: PieceLike + Clone>(
    pieces: &[P],
    direction: Side,
) -> Result<Aggregate<P>, AggregateError> {
    if pieces.is_empty() {
        return Ok(Aggregate {
            direction,
            segments: Vec::new(),
            corners: Vec::new(),
        });
    }
    check_tiling(pieces, direction)?;

    // Split into (form, pieces) groups.
    let mut groups: Vec<(AffineForm, Vec<&P>)> = Vec::new();
    let mut pending: Vec<&P> = Vec::new();
    let mut corners = Vec::new();
    for p in pieces {
        match p.value() {
            PieceValue::Form(f) => match groups.last_mut() {
                Some((cur, members)) if cur == f => members.push(p),
                Some((cur, _)) => {
                    let ((corner, _), _) = near_far(p.interval(), direction);
                    if cur.intersection(f).as_ref() != Some(corner) {
                        return Err(AggregateError::DiscontinuityDetected {
                            point: corner.clone(),
                            form: cur.clone(),
                            observed: f.eval(corner),
                        });
                    }
                    corners.push(corner.clone());
                    groups.push((f.clone(), vec![p]));
                }
                None => {
                    let mut members = Vec::with_capacity(pending.len() + 1);
                    for s in pending.drain(..) {
                        check_point(s, f)?;
                        members.push(s);
                    }
                    members.push(p);
                    groups.push((f.clone(), members));
                }
            },
            PieceValue::Point(_) => match groups.last_mut() {
                Some((cur, members)) => {
                    check_point(p, cur)?;
                    members.push(p);
                }
                None => pending.push(p),
            },
        }
    }
    if groups.is_empty() {
        return Err(AggregateError::NoAtoms);
    }

    let segments = groups
        .into_iter()
        .map(|(m_form, members)| {
            let mut subintervals: Vec<Subinterval<P>> = Vec::new();
            for p in &members {
                match subintervals.last_mut() {
                    Some(s) if s.len == p.len() => s.pieces.push((*p).clone()),
                    _ => subintervals.push(Subinterval {
                        interval: p.interval().clone(),
                        len: p.len(),
                        pieces: vec![(*p).clone()],
                    }),
                }
            }
            for s in &mut subintervals {
                s.interval = hull(s.pieces.iter().map(|p| p.interval()));
            }
            Segment {
                interval: hull(members.iter().map(|p| p.interval())),
                m_form,
                subintervals,
            }
        })
        .collect();
    Ok(Aggregate {
        direction,
        segments,
        corners,
    })
}

fn check_point<P: PieceLike>(p: &P, f: &AffineForm) -> Result<(), AggregateError> {
    let point = p.interval().lo();
    if let PieceValue::Point(m) = p.value() {
        if f.eval(point) != *m {
            return Err(AggregateError::DiscontinuityDetected {
                point: point.clone(),
                form: f.clone(),
                observed: m.clone(),
            });
        }
    }
    Ok(())
}
