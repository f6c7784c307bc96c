//! Concrete M&m sequences.
//!
//! Starting from a multiset of seeds, each new point `x_n` is chosen so that
//! the mean of all `n` points equals the median of the previous `n - 1`:
//! `x_n = n·med(x_1..x_{n-1}) - (x_1 + … + x_{n-1})`. For the normalized start
//! `{0, x, 1}` the run stops at the first `n` with `x_n` equal to the running
//! median; that `n` is the length `L(x)` and the median is `m(x)`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;

pub const DEFAULT_THRESHOLD: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrajectoryError {
    #[error("median of an empty list")]
    EmptyInput,
    #[error("starting point {0} is outside (0, 1)")]
    OutOfDomain(Rational),
    #[error("threshold {0} is below 4")]
    InvalidThreshold(usize),
    #[error("triple must be strictly increasing, got ({0}, {1}, {2})")]
    UnorderedTriple(Rational, Rational, Rational),
    #[error("no termination for x = {} within {} steps", .0.x, .0.threshold)]
    NotTerminated(Box<PartialTrajectory>),
}

/// Largest index a run may reach before giving up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunLimit(usize);

impl RunLimit {
    pub fn new(threshold: usize) -> Result<Self, TrajectoryError> {
        if threshold < 4 {
            return Err(TrajectoryError::InvalidThreshold(threshold));
        }
        Ok(RunLimit(threshold))
    }

    pub fn threshold(self) -> usize {
        self.0
    }
}

impl Default for RunLimit {
    fn default() -> Self {
        RunLimit(DEFAULT_THRESHOLD)
    }
}

/// What was computed before the threshold ran out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialTrajectory {
    pub x: Rational,
    pub threshold: usize,
    pub points: Vec<Rational>,
    pub medians: Vec<Rational>,
}

/// A terminated run from `{0, x, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub x: Rational,
    /// `x_1 = 0, x_2 = x, x_3 = 1, x_4, …, x_L`.
    pub points: Vec<Rational>,
    /// `m_3 = x, m_4, …, m_{L-1}`: the running median after each point that
    /// did not terminate the run.
    pub medians: Vec<Rational>,
    pub len: usize,
    pub m: Rational,
}

impl Serialize for Trajectory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Trajectory", 5)?;
        s.serialize_field("x", &self.x)?;
        s.serialize_field("L", &self.len)?;
        s.serialize_field("m", &self.m)?;
        s.serialize_field("points", &self.points)?;
        s.serialize_field("medians", &self.medians)?;
        s.end()
    }
}

/// Incremental M&m iteration over an arbitrary seed multiset.
///
/// Keeps a sorted copy of the points so the median is an index lookup and
/// each insertion is a binary search.
#[derive(Debug, Clone)]
pub struct MmIteration {
    points: Vec<Rational>,
    sorted: Vec<Rational>,
    sum: Rational,
    median: Rational,
}

impl MmIteration {
    pub fn new(seeds: Vec<Rational>) -> Result<Self, TrajectoryError> {
        if seeds.is_empty() {
            return Err(TrajectoryError::EmptyInput);
        }
        let mut sorted = seeds.clone();
        sorted.sort();
        let mut sum = Rational::zero();
        for s in &seeds {
            sum += s;
        }
        let median = sorted_median(&sorted);
        Ok(MmIteration {
            points: seeds,
            sorted,
            sum,
            median,
        })
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn median(&self) -> &Rational {
        &self.median
    }

    pub fn sum(&self) -> &Rational {
        &self.sum
    }

    /// The point that would be appended next.
    pub fn propose(&self) -> Rational {
        let n = self.points.len() as i64 + 1;
        &self.median.mul_int(n) - &self.sum
    }

    pub fn push(&mut self, value: Rational) {
        let at = self.sorted.partition_point(|v| *v <= value);
        self.sorted.insert(at, value.clone());
        self.sum += &value;
        self.points.push(value);
        self.median = sorted_median(&self.sorted);
    }

    pub fn into_points(self) -> Vec<Rational> {
        self.points
    }
}

fn sorted_median(sorted: &[Rational]) -> Rational {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2].clone()
    } else {
        sorted[n / 2 - 1].midpoint(&sorted[n / 2])
    }
}

/// Median of a non-empty list; input order is irrelevant.
pub fn median_of(values: &[Rational]) -> Result<Rational, TrajectoryError> {
    if values.is_empty() {
        return Err(TrajectoryError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort();
    Ok(sorted_median(&sorted))
}

/// Runs the M&m iteration from `{0, x, 1}` until the new point equals the
/// running median, or the threshold is exhausted.
pub fn run_trajectory(x: &Rational, limit: RunLimit) -> Result<Trajectory, TrajectoryError> {
    if !x.is_positive() || *x >= 1 {
        return Err(TrajectoryError::OutOfDomain(x.clone()));
    }
    let mut it = MmIteration::new(vec![Rational::zero(), x.clone(), Rational::one()])?;
    let mut medians = vec![x.clone()];
    for j in 4..=limit.threshold() {
        let next = it.propose();
        if next == *it.median() {
            let m = it.median().clone();
            it.push(next);
            return Ok(Trajectory {
                x: x.clone(),
                points: it.into_points(),
                medians,
                len: j,
                m,
            });
        }
        it.push(next);
        medians.push(it.median().clone());
    }
    Err(TrajectoryError::NotTerminated(Box::new(
        PartialTrajectory {
            x: x.clone(),
            threshold: limit.threshold(),
            points: it.into_points(),
            medians,
        },
    )))
}

/// Image of `b` under the increasing affine map sending `a ↦ 0`, `c ↦ 1`.
pub fn normalize_triple(
    a: &Rational,
    b: &Rational,
    c: &Rational,
) -> Result<Rational, TrajectoryError> {
    if !(a < b && b < c) {
        return Err(TrajectoryError::UnorderedTriple(
            a.clone(),
            b.clone(),
            c.clone(),
        ));
    }
    Ok(&(b - a) / &(c - a))
}

/// Continues a terminated run for `extra_steps` more points and checks that
/// every new point and every new median equals `m`.
pub fn verify_stability(t: &Trajectory, extra_steps: usize) -> bool {
    let Ok(mut it) = MmIteration::new(t.points.clone()) else {
        return false;
    };
    if *it.median() != t.m {
        return false;
    }
    for _ in 0..extra_steps {
        let next = it.propose();
        if next != t.m {
            return false;
        }
        it.push(next);
        if *it.median() != t.m {
            return false;
        }
    }
    true
}

/// True when the sequence never changes direction.
pub fn is_monotone(values: &[Rational]) -> bool {
    let up = values.windows(2).all(|w| w[0] <= w[1]);
    up || values.windows(2).all(|w| w[0] >= w[1])
}
