//! Integer-scaled concrete and symbolic runs for the sweep's hot path.
//!
//! Every value of a run started at `x = p/q` has the form `V / (q·2^E)`, and
//! every symbolic form has dyadic coefficients. Keeping numerators over one
//! shared scale turns the iteration into big-integer adds and compares with
//! no gcd work. The scale doubles whenever a midpoint would be fractional.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::affine::AffineForm;
use crate::chain::{ChainError, Occupancy};
use crate::interval::RInterval;
use crate::rational::Rational;
use crate::trajectory::{RunLimit, TrajectoryError};

/// Outcome of a terminated run, without the point list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RunSummary {
    pub len: usize,
    pub m: Rational,
    /// Trajectory indices in increasing value order, ties by index.
    pub order: Vec<usize>,
}

fn dyadic(num: &BigInt, den: &BigInt, shift: usize) -> Rational {
    Rational::new(num.clone(), den << shift).expect("positive denominator")
}

pub(crate) fn summarize_run(x: &Rational, limit: RunLimit) -> Result<RunSummary, TrajectoryError> {
    if !x.is_positive() || *x >= 1 {
        return Err(TrajectoryError::OutOfDomain(x.clone()));
    }
    let q = x.denom().clone();
    let mut shift = 0usize;
    let mut values: Vec<BigInt> = vec![BigInt::zero(), x.numer().clone(), q.clone()];
    values.reserve(64);
    // Indices into `values`, sorted by value then index.
    let mut sorted: Vec<u32> = vec![0, 1, 2];
    let mut sum: BigInt = x.numer() + &q;

    for j in 4..=limit.threshold() {
        let count = sorted.len();
        let median = if count % 2 == 1 {
            values[sorted[count / 2] as usize].clone()
        } else {
            let mut s =
                &values[sorted[count / 2 - 1] as usize] + &values[sorted[count / 2] as usize];
            if s.is_odd() {
                for v in values.iter_mut() {
                    *v <<= 1;
                }
                sum <<= 1;
                s <<= 1;
                shift += 1;
            }
            s >> 1
        };
        let next = &median * BigInt::from(j) - &sum;
        let at = sorted.partition_point(|&i| values[i as usize] <= next);
        sorted.insert(at, values.len() as u32);
        if next == median {
            return Ok(RunSummary {
                len: j,
                m: dyadic(&median, &q, shift),
                order: sorted.iter().map(|&i| i as usize + 1).collect(),
            });
        }
        sum += &next;
        values.push(next);
    }
    let partial = crate::trajectory::run_trajectory(x, limit);
    Err(partial.expect_err("the scaled run and the exact run agree"))
}

/// `a·x + b` with both coefficients over the shared scale `2^shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ScaledForm {
    a: BigInt,
    b: BigInt,
}

impl ScaledForm {
    fn sub(&self, o: &ScaledForm) -> ScaledForm {
        ScaledForm {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
        }
    }

    fn double(&mut self) {
        self.a <<= 1;
        self.b <<= 1;
    }

    fn to_affine(&self, shift: usize) -> AffineForm {
        let one = BigInt::one();
        AffineForm::new(dyadic(&self.a, &one, shift), dyadic(&self.b, &one, shift))
    }
}

/// Running intersection of strict half-lines `c·x + d > 0`, with bounds kept
/// as unreduced fractions `num/den`, `den > 0`.
#[derive(Default)]
struct Bounds {
    lower: Option<(BigInt, BigInt)>,
    upper: Option<(BigInt, BigInt)>,
    contradictory: bool,
}

impl Bounds {
    /// Whether the closure of the current feasible set still contains `x`.
    fn reaches(&self, x: &Rational) -> bool {
        let (p, q) = (x.numer(), x.denom());
        self.lower.as_ref().is_none_or(|(n, d)| n * q <= p * d)
            && self.upper.as_ref().is_none_or(|(n, d)| n * q >= p * d)
    }

    fn require_positive(&mut self, f: &ScaledForm) {
        match f.a.sign() {
            num_bigint::Sign::NoSign => {
                if !f.b.is_positive() {
                    self.contradictory = true;
                }
            }
            num_bigint::Sign::Plus => {
                let cand = (-&f.b, f.a.clone());
                if self
                    .lower
                    .as_ref()
                    .is_none_or(|lo| &cand.0 * &lo.1 > &lo.0 * &cand.1)
                {
                    self.lower = Some(cand);
                }
            }
            num_bigint::Sign::Minus => {
                let cand = (f.b.clone(), -&f.a);
                if self
                    .upper
                    .as_ref()
                    .is_none_or(|hi| &cand.0 * &hi.1 < &hi.0 * &cand.1)
                {
                    self.upper = Some(cand);
                }
            }
        }
    }

    fn finish(self) -> Result<RInterval, ChainError> {
        if self.contradictory {
            return Err(ChainError::EmptyInterval);
        }
        match (self.lower, self.upper) {
            (Some((ln, ld)), Some((un, ud))) => {
                let lo = Rational::new(ln, ld).expect("positive denominator");
                let hi = Rational::new(un, ud).expect("positive denominator");
                RInterval::open(lo, hi).map_err(|_| ChainError::EmptyInterval)
            }
            _ => Err(ChainError::Unbounded),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum OpenAtomError {
    /// The witness sits where two distinct forms meet.
    Degenerate,
    /// The atom's closure was found to exclude the requested point.
    Misses,
    Chain(ChainError),
}

/// Open interval of starting points sharing the driving list `order`, with
/// the run length and the form of `m` there.
///
/// `witness` is a point whose run produced `order`; it fixes the side of
/// every constraint `x_n ≠ M_{n-1}` for `n < L`. The run must end with
/// `x_L` and `M_{L-1}` structurally equal. With `must_reach` set, the
/// construction stops early once the closure is known to miss that point.
pub(crate) fn open_atom(
    order: &[usize],
    witness: &Rational,
    must_reach: Option<&Rational>,
) -> Result<(RInterval, AffineForm), OpenAtomError> {
    let len = order.len();
    if len < 4 {
        return Err(OpenAtomError::Chain(ChainError::TooShort(len)));
    }
    let mut positions = vec![0usize; len + 1];
    for (k, &i) in order.iter().enumerate() {
        positions[i] = k + 1;
    }
    let (p, q) = (witness.numer(), witness.denom());
    let zero = || ScaledForm {
        a: BigInt::zero(),
        b: BigInt::zero(),
    };

    let mut shift = 0usize;
    let mut forms: Vec<ScaledForm> = Vec::with_capacity(len + 1);
    forms.push(zero());
    forms.push(zero());
    forms.push(ScaledForm {
        a: BigInt::one(),
        b: BigInt::zero(),
    });
    forms.push(ScaledForm {
        a: BigInt::zero(),
        b: BigInt::one(),
    });
    let mut chain: Vec<u32> = Vec::with_capacity(len);
    chain.extend([1, 2, 3]);
    let mut occupied = Occupancy::new(len);
    for &pos in &positions[1..=3] {
        occupied.mark(pos);
    }
    let mut sum = ScaledForm {
        a: BigInt::one(),
        b: BigInt::one(),
    };
    let mut bounds = Bounds::default();

    for (n, &pos) in positions.iter().enumerate().skip(4) {
        let count = chain.len();
        let median = if count % 2 == 1 {
            forms[chain[count / 2] as usize].clone()
        } else {
            let (l, r) = (
                &forms[chain[count / 2 - 1] as usize],
                &forms[chain[count / 2] as usize],
            );
            let mut s = ScaledForm {
                a: &l.a + &r.a,
                b: &l.b + &r.b,
            };
            if s.a.is_odd() || s.b.is_odd() {
                for f in forms.iter_mut() {
                    f.double();
                }
                sum.double();
                s.double();
                shift += 1;
            }
            ScaledForm {
                a: s.a >> 1,
                b: s.b >> 1,
            }
        };
        let nn = BigInt::from(n);
        let next = ScaledForm {
            a: &median.a * &nn - &sum.a,
            b: &median.b * &nn - &sum.b,
        };
        if n == len {
            if next != median {
                return Err(OpenAtomError::Degenerate);
            }
        } else {
            let gap = next.sub(&median);
            let at_witness = &gap.a * p + &gap.b * q;
            match at_witness.sign() {
                num_bigint::Sign::Plus => bounds.require_positive(&gap),
                num_bigint::Sign::Minus => bounds.require_positive(&median.sub(&next)),
                num_bigint::Sign::NoSign => return Err(OpenAtomError::Degenerate),
            }
            if must_reach.is_some_and(|x0| !bounds.reaches(x0)) {
                return Err(OpenAtomError::Misses);
            }
        }
        sum.a += &next.a;
        sum.b += &next.b;
        let slot = occupied.count_before(pos);
        occupied.mark(pos);
        chain.insert(slot, n as u32);
        forms.push(next);
        if n == len {
            let m_form = median.to_affine(shift);
            let mut prev: Option<&ScaledForm> = None;
            for &i in &chain {
                let f = &forms[i as usize];
                if let Some(g) = prev {
                    if g != f {
                        bounds.require_positive(&f.sub(g));
                    }
                }
                prev = Some(f);
            }
            let interval = bounds.finish().map_err(OpenAtomError::Chain)?;
            return Ok((interval, m_form));
        }
    }
    unreachable!("the loop returns at n == len")
}
