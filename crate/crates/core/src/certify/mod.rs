//! Certified pieces of the mean-median map.
//!
//! An [`Atom`] is a maximal interval of starting points sharing one driving
//! list; on it the length `L` is constant and `m` is a single affine form.
//! [`sweep`] walks atoms outward from a seed, and [`aggregate`] groups them
//! into constant-`L` subintervals and constant-form segments whose shared
//! boundaries are the corners of `m`.

mod aggregate;
mod sweep;

pub use aggregate::{
    aggregate, Aggregate, AggregateError, PieceLike, PieceValue, Segment, Subinterval,
};
pub use sweep::{StopCondition, StopReason, SweepConfig, SweepError, SweepState, Sweeper};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::AffineForm;
use crate::chain::{ChainError, DrivingList};
use crate::interval::RInterval;
use crate::kernel;
use crate::rational::Rational;
use crate::trajectory::{RunLimit, Trajectory, TrajectoryError};

/// Direction of travel away from a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(format!("unknown side {other:?}, expected left or right")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    /// The probe left `(0, 1)` (`interval` is `None`) or landed in an atom
    /// that does not reach `x0`.
    #[error("probe step {eps} from {x0} is too large")]
    EpsTooLarge {
        x0: Rational,
        eps: Rational,
        interval: Option<RInterval>,
    },
    #[error("probe {0} sits on a degenerate point where the symbolic run does not terminate identically")]
    DegenerateProbe(Rational),
    #[error("trajectory of {x} did not terminate within {threshold} steps")]
    NotTerminated { x: Rational, threshold: usize },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Trajectory(TrajectoryError),
}

impl From<TrajectoryError> for CertifyError {
    fn from(e: TrajectoryError) -> Self {
        match e {
            TrajectoryError::NotTerminated(p) => CertifyError::NotTerminated {
                x: p.x,
                threshold: p.threshold,
            },
            other => CertifyError::Trajectory(other),
        }
    }
}

/// An interval on which the driving list, `L` and the affine form of `m`
/// are all constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub interval: RInterval,
    pub len: usize,
    pub m_form: AffineForm,
    pub driving: DrivingList,
}

/// A single point sitting between two atoms that both exclude it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingletonPiece {
    pub interval: RInterval,
    pub len: usize,
    pub m: Rational,
}

impl SingletonPiece {
    pub fn at(point: &Rational, limit: RunLimit) -> Result<Self, CertifyError> {
        let run = kernel::summarize_run(point, limit)?;
        Ok(SingletonPiece {
            interval: RInterval::point(point.clone()),
            len: run.len,
            m: run.m,
        })
    }

    pub fn point(&self) -> &Rational {
        self.interval.lo()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Atom(Atom),
    Singleton(SingletonPiece),
}

impl Piece {
    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Piece::Atom(a) => Some(a),
            Piece::Singleton(_) => None,
        }
    }
}

/// Trajectory indices sorted by value, ties broken by index.
pub fn driving_list_of(t: &Trajectory) -> DrivingList {
    let mut order: Vec<usize> = (1..=t.points.len()).collect();
    order.sort_by(|&i, &j| t.points[i - 1].cmp(&t.points[j - 1]));
    DrivingList::new(order).expect("a terminated run from 0 < x < 1 orders its seeds")
}

/// Whether the concrete run at `e` honours an atom's `(L, m)` contract.
/// Points outside `(0, 1)` never do.
fn endpoint_matches(
    e: &Rational,
    len: usize,
    m_form: &AffineForm,
    limit: RunLimit,
) -> Result<bool, CertifyError> {
    match kernel::summarize_run(e, limit) {
        Ok(run) => Ok(run.len == len && run.m == m_form.eval(e)),
        Err(TrajectoryError::OutOfDomain(_)) => Ok(false),
        Err(other) => Err(other.into()),
    }
}

/// Open atom of the run at `witness`: its interval, `L`, form of `m` and
/// driving list.
enum AtomMiss {
    Certify(CertifyError),
    /// Stopped early: the atom does not reach the requested point.
    Misses,
}

impl From<TrajectoryError> for AtomMiss {
    fn from(e: TrajectoryError) -> Self {
        AtomMiss::Certify(e.into())
    }
}

impl From<ChainError> for AtomMiss {
    fn from(e: ChainError) -> Self {
        AtomMiss::Certify(e.into())
    }
}

fn open_atom_at(
    witness: &Rational,
    limit: RunLimit,
    must_reach: Option<&Rational>,
) -> Result<(RInterval, usize, AffineForm, DrivingList), AtomMiss> {
    let run = kernel::summarize_run(witness, limit)?;
    let (interval, m_form) =
        kernel::open_atom(&run.order, witness, must_reach).map_err(|e| match e {
            kernel::OpenAtomError::Degenerate => {
                AtomMiss::Certify(CertifyError::DegenerateProbe(witness.clone()))
            }
            kernel::OpenAtomError::Misses => AtomMiss::Misses,
            kernel::OpenAtomError::Chain(c) => AtomMiss::Certify(CertifyError::Chain(c)),
        })?;
    let driving = DrivingList::new(run.order)?;
    Ok((interval, run.len, m_form, driving))
}

fn promote_endpoints(
    interval: RInterval,
    len: usize,
    m_form: &AffineForm,
    limit: RunLimit,
) -> Result<RInterval, CertifyError> {
    let lo_closed = endpoint_matches(interval.lo(), len, m_form, limit)?;
    let hi_closed = endpoint_matches(interval.hi(), len, m_form, limit)?;
    Ok(interval
        .with_closure(lo_closed, hi_closed)
        .expect("non-degenerate interval"))
}

/// Certifies the atom just to one side of `x0`, probing at `x0 ± eps`.
///
/// Fails with [`CertifyError::EpsTooLarge`] when the probe's atom does not
/// have `x0` in its closure.
pub fn certify_atom(
    x0: &Rational,
    eps: &Rational,
    limit: RunLimit,
    side: Side,
) -> Result<Atom, CertifyError> {
    probe_atom(x0, eps, limit, side, false)
}

/// [`certify_atom`] for callers that discard the far atom on failure: the
/// construction is abandoned as soon as it cannot reach `x0`, and the
/// resulting [`CertifyError::EpsTooLarge`] carries no interval.
pub(crate) fn certify_atom_fast(
    x0: &Rational,
    eps: &Rational,
    limit: RunLimit,
    side: Side,
) -> Result<Atom, CertifyError> {
    probe_atom(x0, eps, limit, side, true)
}

fn probe_atom(
    x0: &Rational,
    eps: &Rational,
    limit: RunLimit,
    side: Side,
    early_exit: bool,
) -> Result<Atom, CertifyError> {
    let too_large = |interval| CertifyError::EpsTooLarge {
        x0: x0.clone(),
        eps: eps.clone(),
        interval,
    };
    let probe = match side {
        Side::Right => x0 + eps,
        Side::Left => x0 - eps,
    };
    if !probe.is_positive() || probe >= 1 {
        return Err(too_large(None));
    }
    let (interval, len, m_form, driving) =
        match open_atom_at(&probe, limit, early_exit.then_some(x0)) {
            Ok(found) => found,
            Err(AtomMiss::Misses) => return Err(too_large(None)),
            Err(AtomMiss::Certify(e)) => return Err(e),
        };
    if !interval.closure_contains(x0) {
        return Err(too_large(Some(interval)));
    }
    let interval = promote_endpoints(interval, len, &m_form, limit)?;
    Ok(Atom {
        interval,
        len,
        m_form,
        driving,
    })
}

/// Certifies the atom whose driving list is the one of `x` itself.
///
/// When `x` is an atom endpoint the result is the neighbouring atom whose
/// ordering agrees with `x`'s tie-breaking, or an error.
pub fn certify_containing(x: &Rational, limit: RunLimit) -> Result<Atom, CertifyError> {
    let (interval, len, m_form, driving) = match open_atom_at(x, limit, None) {
        Ok(found) => found,
        Err(AtomMiss::Certify(e)) => return Err(e),
        Err(AtomMiss::Misses) => unreachable!("no point to reach"),
    };
    let interval = promote_endpoints(interval, len, &m_form, limit)?;
    Ok(Atom {
        interval,
        len,
        m_form,
        driving,
    })
}

/// A sample point whose concrete run disagrees with an atom.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sample {point} of {interval}: {detail}")]
pub struct SampleMismatch {
    pub interval: RInterval,
    pub point: Rational,
    pub detail: String,
}

/// Interior sample points: the midpoint first, then the quartiles.
pub fn sample_points(interval: &RInterval, count: usize) -> Vec<Rational> {
    let all = [
        interval.midpoint(),
        interval.lerp(1, 4),
        interval.lerp(3, 4),
    ];
    let mut out: Vec<Rational> = all.into_iter().take(count).collect();
    // Odd denominators keep further samples off the first three.
    let extra = count.saturating_sub(3) as i64;
    for k in 1..=extra {
        out.push(interval.lerp(2 * k - 1, 2 * extra + 1));
    }
    out
}

/// Runs the concrete iteration at interior samples of `atom` and requires
/// the same `L`, the same driving list and `m = m_form(s)` exactly.
pub fn check_atom_samples(
    atom: &Atom,
    count: usize,
    limit: RunLimit,
) -> Result<Vec<Rational>, SampleMismatch> {
    check_samples(
        &atom.interval,
        atom.len,
        &atom.m_form,
        Some(atom.driving.as_slice()),
        count,
        limit,
    )
}

/// [`check_atom_samples`] for a piece known only by its interval, `L` and
/// form. The driving list is compared when given.
pub fn check_samples(
    interval: &RInterval,
    len: usize,
    m_form: &AffineForm,
    driving: Option<&[usize]>,
    count: usize,
    limit: RunLimit,
) -> Result<Vec<Rational>, SampleMismatch> {
    let points = sample_points(interval, count);
    for s in &points {
        let fail = |detail: String| SampleMismatch {
            interval: interval.clone(),
            point: s.clone(),
            detail,
        };
        let run = kernel::summarize_run(s, limit).map_err(|e| fail(e.to_string()))?;
        if run.len != len {
            return Err(fail(format!("L = {} instead of {len}", run.len)));
        }
        if driving.is_some_and(|d| run.order != d) {
            return Err(fail("driving list differs".into()));
        }
        let expected = m_form.eval(s);
        if run.m != expected {
            return Err(fail(format!("m = {} instead of {expected}", run.m)));
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::trajectory::run_trajectory;

    fn form(a: &str, b: &str) -> AffineForm {
        AffineForm::new(q(a), q(b))
    }

    #[test]
    fn samples_agree_with_the_first_atom() {
        let atom =
            certify_atom(&q("1/2"), &q("1/100000"), RunLimit::default(), Side::Right).unwrap();
        let pts = check_atom_samples(&atom, 3, RunLimit::default()).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|p| atom.interval.interior_contains(p)));

        let mut forged = atom.clone();
        forged.m_form = form("333/8", "-163/8");
        assert!(check_atom_samples(&forged, 1, RunLimit::default()).is_err());
        assert_eq!(sample_points(&atom.interval, 5).len(), 5);
    }

    #[test]
    fn driving_lists_of_small_runs() {
        let t = run_trajectory(&q("7/12"), RunLimit::default()).unwrap();
        assert_eq!(driving_list_of(&t).as_slice(), &[1, 2, 4, 3, 5, 9, 6, 7, 8]);
        let t = run_trajectory(&q("1/2"), RunLimit::default()).unwrap();
        assert_eq!(driving_list_of(&t).as_slice(), &[1, 2, 4, 3]);
    }

    #[test]
    fn driving_list_right_of_one_half() {
        let t = run_trajectory(&q("50001/100000"), RunLimit::default()).unwrap();
        assert_eq!(t.len, 73);
        let d = driving_list_of(&t);
        assert_eq!(&d.as_slice()[..11], &[1, 2, 4, 5, 6, 7, 9, 8, 10, 17, 18]);
        assert_eq!(&d.as_slice()[70..], &[56, 44, 3]);
    }

    #[test]
    fn first_atom_right_of_one_half() {
        let atom =
            certify_atom(&q("1/2"), &q("1/100000"), RunLimit::default(), Side::Right).unwrap();
        assert_eq!(atom.interval.to_string(), "(1/2, 1897/3762]");
        assert_eq!(atom.len, 73);
        assert_eq!(atom.m_form, form("333/8", "-325/16"));
    }

    #[test]
    fn oversized_probe_is_rejected() {
        let err =
            certify_atom(&q("1897/3762"), &q("1/2"), RunLimit::default(), Side::Right).unwrap_err();
        assert!(
            matches!(err, CertifyError::EpsTooLarge { interval: None, .. }),
            "{err:?}"
        );
        let err = certify_atom(
            &q("1897/3762"),
            &q("1/200"),
            RunLimit::default(),
            Side::Right,
        )
        .unwrap_err();
        let CertifyError::EpsTooLarge {
            interval: Some(far),
            ..
        } = err
        else {
            panic!("{err:?}");
        };
        assert_eq!(far.to_string(), "(459/902, 429/842)");
    }

    #[test]
    fn isolated_termination_is_degenerate() {
        // 24653/47025 stops at L = 1879 only because two distinct forms
        // cross exactly there; its neighbours run far longer.
        let err = certify_atom(
            &q("1897/3762"),
            &q("1/50"),
            RunLimit::default(),
            Side::Right,
        )
        .unwrap_err();
        assert_eq!(err, CertifyError::DegenerateProbe(q("24653/47025")));
    }

    #[test]
    fn atom_containing_ten_nineteenths() {
        let atom = certify_containing(&q("10/19"), RunLimit::default()).unwrap();
        assert_eq!(atom.len, 47);
        assert_eq!(atom.m_form, form("141/4", "-137/8"));
        assert!(atom.interval.interior_contains(&q("10/19")));
        assert!(*atom.interval.lo() >= q("841/1598"));
        assert!(*atom.interval.hi() <= q("639/1214"));
    }

    #[test]
    fn left_atom_at_two_thirds() {
        let atom =
            certify_atom(&q("2/3"), &q("1/100000"), RunLimit::default(), Side::Left).unwrap();
        assert_eq!(*atom.interval.hi(), q("2/3"));
        // L(2/3) = 7 differs from the atom's length, so 2/3 stays outside.
        assert!(!atom.interval.hi_closed());
        assert_eq!(atom.len, 63);
        assert_eq!(atom.m_form, form("-225/2", "76"));
    }
}
